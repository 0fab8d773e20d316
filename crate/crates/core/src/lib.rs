pub mod expr;
pub mod field;
pub mod linalg;
pub mod pgmod;
pub mod poly;
pub mod polymat;
pub mod scenario;
pub mod series;
pub mod sheaf;
pub mod symk;
pub mod translate;
pub mod ugl2;
pub mod verify;

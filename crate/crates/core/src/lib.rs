pub mod curves;
pub mod enumeration;
pub mod exactmath;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod render;

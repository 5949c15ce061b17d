pub mod cayley;
pub mod linalg;
pub mod sdp;
pub mod sphere;
pub mod theta;
pub mod verifier;

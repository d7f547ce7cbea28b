//! Special functions, the inverse Kummer law and primitive samplers.

mod quad;

pub mod concentration;
pub mod inv_kummer;
pub mod samplers;
pub mod special;

pub use concentration::{concentration_point, concentration_point_approx};
pub use inv_kummer::{
    inv_kummer_log_moment, inv_kummer_log_pdf, inv_kummer_mean_var, inv_kummer_moment, inv_kummer_sample,
    InvKummerParams, InvKummerSampler,
};
pub use samplers::{sample_dirichlet, sample_gamma, sample_inv_gamma, sample_multinomial};
pub use special::{log_gauss_2f1, log_kummer_integral, log_kummer_u};

//! Pinned physical constants and the unit conversions derived from them.
//!
//! Energies are carried in Hz (linear frequency) everywhere in the crate.

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Free-electron g factor.
pub const G_ELECTRON: f64 = 2.002_319_304_36;
/// One Debye in C m.
pub const DEBYE: f64 = 3.335_64e-30;
/// 4 pi epsilon_0 in C^2 J^-1 m^-1.
pub const FOUR_PI_EPS0: f64 = 1.112_650_055_45e-10;
/// One wavenumber (cm^-1) in Hz.
pub const HZ_PER_WAVENUMBER: f64 = 29.979_245_8e9;

/// Electron-spin Zeeman scale g_S mu_B / h in Hz per mT.
pub fn zeeman_hz_per_mt() -> f64 {
    G_ELECTRON * BOHR_MAGNETON / PLANCK * 1e-3
}

/// Stark scale for 1 D in 1 kV/cm, in Hz.
pub fn stark_hz_per_debye_kv_cm() -> f64 {
    DEBYE * 1e5 / PLANCK
}

/// Dipole-dipole scale d^2 / (4 pi eps0 h R^3) for d = 1 D and R = 1 nm, in Hz.
pub fn dipolar_hz_nm3_per_debye2() -> f64 {
    DEBYE * DEBYE / (FOUR_PI_EPS0 * PLANCK) * 1e27
}

/// Converts an electric offset in V/m to kV/cm.
pub fn v_per_m_to_kv_per_cm(x: f64) -> f64 {
    x * 1e-5
}

/// Snapshot of the pinned values, used when writing run manifests.
pub fn manifest_lines() -> Vec<String> {
    vec![
        format!("h_J_s = {PLANCK:.10e}"),
        format!("mu_B_J_T = {BOHR_MAGNETON:.11e}"),
        format!("g_S = {G_ELECTRON:.12}"),
        format!("debye_C_m = {DEBYE:.6e}"),
        format!("four_pi_eps0 = {FOUR_PI_EPS0:.12e}"),
        format!("Hz_per_cm-1 = {HZ_PER_WAVENUMBER:.10e}"),
        format!("zeeman_Hz_per_mT = {:.10e}", zeeman_hz_per_mt()),
        format!("stark_Hz_per_D_kV_cm = {:.10e}", stark_hz_per_debye_kv_cm()),
        format!("dipolar_Hz_nm3_per_D2 = {:.10e}", dipolar_hz_nm3_per_debye2()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_scales() {
        assert!((zeeman_hz_per_mt() * 1e3 / 28.024_951_4e9 - 1.0).abs() < 1e-8);
        assert!((stark_hz_per_debye_kv_cm() / 503.412e6 - 1.0).abs() < 1e-5);
        assert!((dipolar_hz_nm3_per_debye2() / 1.509_189_319e11 - 1.0).abs() < 1e-9);
        assert!((dipolar_hz_nm3_per_debye2() / 1.509_26e11 - 1.0).abs() < 1e-4);
        // 600 mT Zeeman splitting of M_S = +-1/2
        assert!((zeeman_hz_per_mt() * 600.0 / 16.815e9 - 1.0).abs() < 1e-4);
    }
}

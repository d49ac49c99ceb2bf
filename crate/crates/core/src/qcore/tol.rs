/// Numerical tolerances shared by validation routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub norm: f64,
    pub herm: f64,
    pub psd: f64,
    pub eig: f64,
    pub ns: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-9,
            herm: 1e-9,
            psd: 1e-9,
            eig: 1e-7,
            ns: 1e-9,
        }
    }
}

impl Tolerances {
    /// All tolerances set to the same value.
    pub fn uniform(t: f64) -> Self {
        Tolerances {
            norm: t,
            herm: t,
            psd: t,
            eig: t.max(1e-7),
            ns: t,
        }
    }
}

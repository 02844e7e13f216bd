//! Budget constants fixed by the sweeps under `calibration/` in the
//! repository root. Rerun with `plantedcsp bench calibration/<file>.json`.

use crate::experiment::budget;

/// `m = C · n · ln n` for NAE-3 (`r = 2`): every trial recovered at
/// `n ∈ {100, 200, 400}` from `C = 2000` upward, none at `C = 500`.
pub const C_R2: f64 = 3000.0;

/// `m = C · n^{3/2} · ln n` for quiet 4-SAT (`r = 3`): all trials recovered
/// at `n ∈ {50, 100}` from `C = 3000`, none at `C = 1000`.
pub const C_R3: f64 = 4000.0;

pub fn budget_r2(n: usize) -> u64 {
    budget(C_R2, n, 2, true)
}

pub fn budget_r3(n: usize) -> u64 {
    budget(C_R3, n, 3, true)
}

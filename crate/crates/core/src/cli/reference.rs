//! Published reference strategies, used only for side-by-side comparison.

pub const GAMMAS: [f64; 5] = [-0.5, -0.1, 0.0, 0.5, 1.0];

#[derive(Debug, Clone, Copy)]
pub struct Block {
    pub label: &'static str,
    pub a1: f64,
    pub a2: f64,
    pub beta: f64,
    pub rho: f64,
    pub survival_corr: f64,
    pub pi1: [f64; 5],
    pub pi2: [f64; 5],
    pub merton: f64,
}

// [PAPER] Table 1.
pub const TABLE1: [Block; 3] = [
    Block {
        label: "a1=0.01 a2=0.1 beta=2",
        a1: 0.01,
        a2: 0.1,
        beta: 2.0,
        rho: 0.0,
        survival_corr: 0.2936,
        pi1: [0.462, 1.659, 1.892, 2.621, 2.832],
        pi2: [-1.047, -0.709, -0.498, 0.623, 1.168],
        merton: 2.0,
    },
    Block {
        label: "a1=0.1 a2=0.1 beta=2",
        a1: 0.1,
        a2: 0.1,
        beta: 2.0,
        rho: 0.0,
        survival_corr: 0.5736,
        pi1: [-0.353, -0.210, -0.147, 0.556, 2.0],
        pi2: [-0.353, -0.210, -0.147, 0.556, 2.0],
        merton: 2.0,
    },
    Block {
        label: "a1=0.3 a2=0.1 beta=2",
        a1: 0.3,
        a2: 0.1,
        beta: 2.0,
        rho: 0.0,
        survival_corr: 0.4555,
        pi1: [-1.723, -1.719, -1.647, -0.697, 1.293],
        pi2: [-0.132, 0.453, 0.521, 1.121, 2.707],
        merton: 2.0,
    },
];

// [PAPER] Table 2.
pub const TABLE2: [Block; 4] = [
    Block {
        label: "rho=0 beta=1",
        a1: 0.01,
        a2: 0.1,
        beta: 1.0,
        rho: 0.0,
        survival_corr: 0.0,
        pi1: [0.228, 0.942, 1.099, 1.966, 2.459],
        pi2: [-0.867, -0.452, -0.278, 0.856, 1.541],
        merton: 2.0,
    },
    Block {
        label: "rho=0 beta=2",
        a1: 0.01,
        a2: 0.1,
        beta: 2.0,
        rho: 0.0,
        survival_corr: 0.2936,
        pi1: [0.462, 1.659, 1.892, 2.621, 2.832],
        pi2: [-1.047, -0.709, -0.498, 0.623, 1.168],
        merton: 2.0,
    },
    Block {
        label: "rho=0.3 beta=1",
        a1: 0.01,
        a2: 0.1,
        beta: 1.0,
        rho: 0.3,
        survival_corr: 0.0,
        pi1: [0.492, 1.081, 1.188, 1.715, 2.025],
        pi2: [-0.959, -0.504, -0.348, 0.519, 1.052],
        merton: 1.539,
    },
    Block {
        label: "rho=0.3 beta=2",
        a1: 0.01,
        a2: 0.1,
        beta: 2.0,
        rho: 0.3,
        survival_corr: 0.2936,
        pi1: [0.863, 1.939, 2.077, 2.399, 2.450],
        pi2: [-1.235, -0.817, -0.626, 0.216, 0.627],
        merton: 1.539,
    },
];

pub fn table(id: u8) -> Option<&'static [Block]> {
    match id {
        1 => Some(&TABLE1),
        2 => Some(&TABLE2),
        _ => None,
    }
}

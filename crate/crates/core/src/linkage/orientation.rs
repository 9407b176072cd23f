use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        self as usize
    }
}

/// A proper rotation mapping coordinate axes onto coordinate axes, stored
/// as an integer matrix acting on column vectors. There are 24 of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[[i8; 3]; 3]", into = "[[i8; 3]; 3]")]
pub struct Orientation([[i8; 3]; 3]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("matrix {0:?} is not an axis-aligned proper rotation")]
pub struct InvalidOrientation(pub [[i8; 3]; 3]);

impl TryFrom<[[i8; 3]; 3]> for Orientation {
    type Error = InvalidOrientation;

    fn try_from(m: [[i8; 3]; 3]) -> Result<Self, Self::Error> {
        let signed_permutation = (0..3).all(|i| {
            let row_ok = m[i].iter().filter(|&&v| v != 0).count() == 1 && m[i].iter().all(|v| v.abs() <= 1);
            let col_ok = (0..3).filter(|&r| m[r][i] != 0).count() == 1;
            row_ok && col_ok
        });
        if signed_permutation && det(&m) == 1 {
            Ok(Self(m))
        } else {
            Err(InvalidOrientation(m))
        }
    }
}

impl From<Orientation> for [[i8; 3]; 3] {
    fn from(o: Orientation) -> Self {
        o.0
    }
}

fn det(m: &[[i8; 3]; 3]) -> i32 {
    let m = m.map(|r| r.map(i32::from));
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl Default for Orientation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Orientation {
    pub const IDENTITY: Self = Self([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    /// Right-handed quarter turn about a world axis; `positive` is +90°.
    /// The +90° turn about X maps (0,1,0) to (0,0,1).
    pub fn quarter_turn(axis: Axis, positive: bool) -> Self {
        let s: i8 = if positive { 1 } else { -1 };
        let (a, b) = match axis {
            Axis::X => (1, 2),
            Axis::Y => (2, 0),
            Axis::Z => (0, 1),
        };
        let mut m = [[0i8; 3]; 3];
        m[axis.index()][axis.index()] = 1;
        m[b][a] = s;
        m[a][b] = -s;
        Self(m)
    }

    pub fn matrix(&self) -> [[i8; 3]; 3] {
        self.0
    }

    /// `self * rhs`: apply `rhs` first.
    pub fn compose(&self, rhs: &Self) -> Self {
        let mut m = [[0i8; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Self(m)
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        self.0.map(|row| (0..3).map(|k| f64::from(row[k]) * v[k]).sum())
    }

    /// The full rotation group, identity first.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            for signs in 0..8u8 {
                let mut m = [[0i8; 3]; 3];
                for (r, &c) in perm.iter().enumerate() {
                    m[r][c] = if signs >> r & 1 == 1 { -1 } else { 1 };
                }
                if let Ok(o) = Self::try_from(m) {
                    out.push(o);
                }
            }
        }
        out
    }
}

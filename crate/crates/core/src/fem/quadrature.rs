//! Quadrature on the reference triangle and the reference segment.
//!
//! Triangle rules are given in barycentric coordinates with weights summing
//! to one; multiply by the cell area. Line rules live on `[0, 1]` with
//! weights summing to one.

#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LineRule {
    pub degree: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[b, a, a], [a, b, a], [a, a, b]] {
        pts.push(p);
        wts.push(w);
    }
}

fn orbit6(a: f64, b: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        pts.push(p);
        wts.push(w);
    }
}

impl TriangleRule {
    /// Smallest available symmetric rule exact for polynomials of total
    /// degree `degree` (at most 8).
    pub fn with_degree(degree: usize) -> Self {
        let mut p = Vec::new();
        let mut w = Vec::new();
        let exact = match degree {
            0 | 1 => {
                p.push([1.0 / 3.0; 3]);
                w.push(1.0);
                1
            }
            2 => {
                orbit3(1.0 / 6.0, 1.0 / 3.0, &mut p, &mut w);
                2
            }
            3 | 4 => {
                orbit3(0.445948490915965, 0.223381589678011, &mut p, &mut w);
                orbit3(0.091576213509771, 0.109951743655322, &mut p, &mut w);
                4
            }
            5..=8 => {
                p.push([1.0 / 3.0; 3]);
                w.push(0.144315607677787);
                orbit3(0.459292588292723, 0.095091634267285, &mut p, &mut w);
                orbit3(0.170569307751760, 0.103217370534718, &mut p, &mut w);
                orbit3(0.050547228317031, 0.032458497623198, &mut p, &mut w);
                orbit6(0.008394777409958, 0.263112829634638, 0.027230314174435, &mut p, &mut w);
                8
            }
            d => panic!("no triangle rule of degree {d}"),
        };
        Self {
            degree: exact,
            points: p,
            weights: w,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl LineRule {
    /// Gauss-Legendre rule exact for degree `degree` (at most 9).
    pub fn with_degree(degree: usize) -> Self {
        let (nodes, weights, exact): (Vec<f64>, Vec<f64>, usize) = match degree {
            0 | 1 => (vec![0.0], vec![2.0], 1),
            2..=5 => {
                let a = (3.0f64 / 5.0).sqrt();
                (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0], 5)
            }
            6..=9 => {
                let s = (10.0f64 / 7.0).sqrt();
                let x1 = (5.0 - 2.0 * s).sqrt() / 3.0;
                let x2 = (5.0 + 2.0 * s).sqrt() / 3.0;
                let r = 70.0f64.sqrt();
                let w1 = (322.0 + 13.0 * r) / 900.0;
                let w2 = (322.0 - 13.0 * r) / 900.0;
                (vec![-x2, -x1, 0.0, x1, x2], vec![w2, w1, 128.0 / 225.0, w1, w2], 9)
            }
            d => panic!("no line rule of degree {d}"),
        };
        Self {
            degree: exact,
            points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: weights.iter().map(|w| 0.5 * w).collect(),
        }
    }
}

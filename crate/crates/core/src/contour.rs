//! Marching squares over a rectilinear (possibly non-uniform) grid.

pub type Point = [f64; 2];

/// Scalar field sampled at `xs × ys`. `values[j * xs.len() + i]` holds the
/// value at `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    pub fn cell_count(&self) -> usize {
        self.xs.len().saturating_sub(1) * self.ys.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy)]
enum Edge {
    Bottom,
    Right,
    Top,
    Left,
}

/// Extracts the `level` contour as a list of segments.
///
/// Crossings are placed by linear interpolation along each cell edge and then
/// polished by bisection on `field`, so every endpoint evaluates to `level`
/// up to `tol` whenever the field is continuous along the edge.
pub fn march(grid: &Grid, level: f64, field: impl Fn(f64, f64) -> f64, tol: f64) -> Vec<[Point; 2]> {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let mut segments = Vec::new();
    if nx < 2 || ny < 2 {
        return segments;
    }
    let above = |v: f64| v > level;

    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [
                ([grid.xs[i], grid.ys[j]], grid.at(i, j)),
                ([grid.xs[i + 1], grid.ys[j]], grid.at(i + 1, j)),
                ([grid.xs[i + 1], grid.ys[j + 1]], grid.at(i + 1, j + 1)),
                ([grid.xs[i], grid.ys[j + 1]], grid.at(i, j + 1)),
            ];
            let case = corners
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, (_, v))| acc | (u8::from(above(*v)) << k));
            if case == 0 || case == 15 {
                continue;
            }
            let crossing = |edge: Edge| {
                let (a, b) = match edge {
                    Edge::Bottom => (corners[0], corners[1]),
                    Edge::Right => (corners[1], corners[2]),
                    Edge::Top => (corners[3], corners[2]),
                    Edge::Left => (corners[0], corners[3]),
                };
                edge_crossing(a, b, level, &field, tol)
            };
            let mut push = |e1: Edge, e2: Edge| segments.push([crossing(e1), crossing(e2)]);

            // bit 0 = bottom-left, 1 = bottom-right, 2 = top-right, 3 = top-left
            match case {
                1 | 14 => push(Edge::Left, Edge::Bottom),
                2 | 13 => push(Edge::Bottom, Edge::Right),
                3 | 12 => push(Edge::Left, Edge::Right),
                4 | 11 => push(Edge::Right, Edge::Top),
                6 | 9 => push(Edge::Bottom, Edge::Top),
                7 | 8 => push(Edge::Left, Edge::Top),
                5 | 10 => {
                    let cx = 0.5 * (corners[0].0[0] + corners[1].0[0]);
                    let cy = 0.5 * (corners[0].0[1] + corners[3].0[1]);
                    let center_above = above(field(cx, cy));
                    // Pair edges around the corners that the center does not join.
                    let cut_bl_tr = (case == 5) != center_above;
                    if cut_bl_tr {
                        push(Edge::Left, Edge::Bottom);
                        push(Edge::Right, Edge::Top);
                    } else {
                        push(Edge::Bottom, Edge::Right);
                        push(Edge::Top, Edge::Left);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

fn edge_crossing(a: (Point, f64), b: (Point, f64), level: f64, field: &impl Fn(f64, f64) -> f64, tol: f64) -> Point {
    let ((pa, va), (pb, vb)) = (a, b);
    let lerp = |t: f64| [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
    let t0 = ((level - va) / (vb - va)).clamp(0.0, 1.0);
    let guess = lerp(t0);
    if (field(guess[0], guess[1]) - level).abs() <= tol {
        return guess;
    }
    // va and vb straddle the level; keep the bracket [lo, hi] in t.
    let a_above = va > level;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = guess;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = lerp(mid);
        let v = field(p[0], p[1]);
        best = p;
        if (v - level).abs() <= tol {
            break;
        }
        if (v > level) == a_above {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

//! Linear interface reconstruction on a single 2D cell.

use crate::geometry::{Aabb, Implicit};
use crate::scalar::Real;

/// Bisection stops once `|phi| <= ROOT_TOL` (or after [`MAX_BISECTIONS`] steps).
pub const ROOT_TOL: f64 = 1e-13;
pub const MAX_BISECTIONS: usize = 50;

/// Piecewise-linear reconstruction of `cell ∩ {phi <= 0}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarchingCell<T> {
    /// Counter-clockwise vertex loops approximating the inside region.
    pub polygons: Vec<Vec<[T; 2]>>,
    /// Interface segments, oriented with the inside region on the left.
    pub segments: Vec<[[T; 2]; 2]>,
    /// No sign change on the cell boundary: whole/empty cell chosen by center sign.
    pub fallback: bool,
}

impl<T: Real> MarchingCell<T> {
    pub fn interface_length(&self) -> T {
        self.segments
            .iter()
            .map(|[a, b]| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt())
            .sum()
    }
}

#[derive(Clone, Copy)]
enum Vertex<T> {
    Corner([T; 2]),
    Entry([T; 2]),
    Exit([T; 2]),
}

impl<T: Copy> Vertex<T> {
    fn pos(&self) -> [T; 2] {
        match *self {
            Vertex::Corner(p) | Vertex::Entry(p) | Vertex::Exit(p) => p,
        }
    }
}

fn bisect<T: Real, L: Implicit<T> + ?Sized>(ls: &L, mut a: [T; 2], mut b: [T; 2], a_inside: bool) -> [T; 2] {
    let tol = T::lit(ROOT_TOL);
    let half = T::lit(0.5);
    let mut mid = [(a[0] + b[0]) * half, (a[1] + b[1]) * half];
    for _ in 0..MAX_BISECTIONS {
        mid = [(a[0] + b[0]) * half, (a[1] + b[1]) * half];
        let phi = ls.value(&mid);
        if phi.abs() <= tol {
            return mid;
        }
        if (phi <= T::zero()) == a_inside {
            a = mid;
        } else {
            b = mid;
        }
    }
    mid
}

/// Marching-squares reconstruction of the inside part of a cut cell.
///
/// Each cell edge is sampled at `samples_per_axis` points (corners included) and
/// every sign change is refined to a root by bisection. Walking the boundary
/// counter-clockwise yields runs `entry, corners.., exit`. With several runs, the
/// center sample decides the saddle ambiguity: inside joins all runs into one
/// polygon, outside keeps one polygon per run.
pub fn marching_squares_polygon<T: Real, L: Implicit<T> + ?Sized>(
    ls: &L,
    cell: &Aabb<T>,
    samples_per_axis: usize,
) -> MarchingCell<T> {
    debug_assert_eq!(cell.dim(), 2);
    let s = samples_per_axis.max(2);
    let (x0, y0, x1, y1) = (cell.lo[0], cell.lo[1], cell.hi[0], cell.hi[1]);
    let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
    let mut ring: Vec<[T; 2]> = Vec::with_capacity(4 * (s - 1));
    for k in 0..4 {
        let a = corners[k];
        let b = corners[(k + 1) % 4];
        for i in 0..s - 1 {
            let t = T::from_usize_lossy(i) / T::from_usize_lossy(s - 1);
            ring.push([a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]);
        }
    }
    let inside: Vec<bool> = ring.iter().map(|p| ls.value(p) <= T::zero()).collect();

    let m = ring.len();
    let mut walk = Vec::with_capacity(m + 8);
    for k in 0..m {
        let next = (k + 1) % m;
        if inside[k] {
            walk.push(Vertex::Corner(ring[k]));
        }
        if inside[k] != inside[next] {
            let r = bisect(ls, ring[k], ring[next], inside[k]);
            walk.push(if inside[k] { Vertex::Exit(r) } else { Vertex::Entry(r) });
        }
    }

    let center = cell.center();
    let center_inside = ls.value(&center) <= T::zero();
    let Some(first_entry) = walk.iter().position(|v| matches!(v, Vertex::Entry(_))) else {
        // no sign change along the boundary
        let polygons = if center_inside { vec![corners.to_vec()] } else { Vec::new() };
        return MarchingCell {
            polygons,
            segments: Vec::new(),
            fallback: true,
        };
    };
    walk.rotate_left(first_entry);

    // split into runs [Entry, Corner.., Exit]
    let mut runs: Vec<Vec<[T; 2]>> = Vec::new();
    for v in &walk {
        if matches!(v, Vertex::Entry(_)) {
            runs.push(Vec::new());
        }
        runs.last_mut().expect("walk starts with an entry").push(v.pos());
    }

    let mut out = MarchingCell::default();
    if runs.len() == 1 || center_inside {
        let r = runs.len();
        for i in 0..r {
            let exit = *runs[i].last().expect("non-empty run");
            let entry = runs[(i + 1) % r][0];
            out.segments.push([exit, entry]);
        }
        out.polygons.push(runs.into_iter().flatten().collect());
    } else {
        for run in runs {
            let entry = run[0];
            let exit = *run.last().expect("non-empty run");
            out.segments.push([exit, entry]);
            out.polygons.push(run);
        }
    }
    out
}

use crate::error::Result;
use crate::scalar::Real;

use super::{GaussLegendre, QuadratureData};

/// Polygons with `|area|` below this produce an empty rule.
pub const DEGENERATE_AREA: f64 = 1e-16;

/// Signed shoelace area (positive for counter-clockwise vertex order).
pub fn shoelace_area<T: Real>(poly: &[[T; 2]]) -> T {
    let n = poly.len();
    let mut acc = T::zero();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc = acc + (a[0] * b[1] - b[0] * a[1]);
    }
    acc * T::lit(0.5)
}

/// Collapsed (Duffy) tensor Gauss rule on triangle `(a, b, c)`, appended to `out`.
///
/// The square `[0,1]^2` maps to `a + u (b - a) + u v (c - b)` with Jacobian `2 A u`,
/// where `A` is the signed triangle area.
pub fn triangle_quadrature<T: Real>(
    tri: [[T; 2]; 3],
    rule: &GaussLegendre<T>,
    cell: Option<usize>,
    out: &mut QuadratureData<T>,
) {
    let [a, b, c] = tri;
    let ab = [b[0] - a[0], b[1] - a[1]];
    let bc = [c[0] - b[0], c[1] - b[1]];
    let twice_area = ab[0] * (c[1] - a[1]) - ab[1] * (c[0] - a[0]);
    if twice_area == T::zero() {
        return;
    }
    let unit: Vec<(T, T)> = rule.on_interval(T::zero(), T::one()).collect();
    for &(u, wu) in &unit {
        for &(v, wv) in &unit {
            let uv = u * v;
            let p = [a[0] + u * ab[0] + uv * bc[0], a[1] + u * ab[1] + uv * bc[1]];
            out.push(&p, wu * wv * twice_area * u, cell);
        }
    }
}

/// Fan triangulation from the vertex centroid with a Duffy rule of `order` points per direction.
///
/// The weights sum to the shoelace area; degenerate polygons give an empty rule.
pub fn polygon_quadrature<T: Real>(poly: &[[T; 2]], order: usize) -> Result<QuadratureData<T>> {
    let rule = GaussLegendre::new(order)?;
    let mut q = QuadratureData::new(2, "polygon");
    push_polygon(poly, &rule, None, &mut q);
    Ok(q)
}

pub(crate) fn push_polygon<T: Real>(
    poly: &[[T; 2]],
    rule: &GaussLegendre<T>,
    cell: Option<usize>,
    out: &mut QuadratureData<T>,
) {
    if poly.len() < 3 || shoelace_area(poly).abs() < T::lit(DEGENERATE_AREA) {
        return;
    }
    let n = T::from_usize_lossy(poly.len());
    let c = [
        poly.iter().map(|p| p[0]).sum::<T>() / n,
        poly.iter().map(|p| p[1]).sum::<T>() / n,
    ];
    for i in 0..poly.len() {
        triangle_quadrature([c, poly[i], poly[(i + 1) % poly.len()]], rule, cell, out);
    }
}

/// Exponent pairs `(i, j)` with `i + j <= degree`, ordered by total degree, then by `j`.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree)
        .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
        .collect()
}

/// Moments `int xi^i eta^j dA` over the union of `polygons`, in local coordinates
/// `xi = (x - origin) / scale`, computed as boundary integrals
/// `oint xi^(i+1) eta^j / (i+1) d eta` (divergence theorem) and reported in
/// physical area units. Ordered as [`monomial_exponents`].
pub fn polygon_moments<T: Real>(
    polygons: &[Vec<[T; 2]>],
    degree: usize,
    origin: [T; 2],
    scale: [T; 2],
) -> Vec<T> {
    let exps = monomial_exponents(degree);
    let rule = GaussLegendre::<T>::new(degree / 2 + 2).expect("small rule");
    let nodes: Vec<(T, T)> = rule.on_interval(T::zero(), T::one()).collect();
    let mut out = vec![T::zero(); exps.len()];
    for poly in polygons {
        let m = poly.len();
        for k in 0..m {
            let a = local(poly[k], origin, scale);
            let b = local(poly[(k + 1) % m], origin, scale);
            let deta = b[1] - a[1];
            if deta == T::zero() {
                continue;
            }
            for &(s, w) in &nodes {
                let xi = a[0] + s * (b[0] - a[0]);
                let eta = a[1] + s * deta;
                for (slot, &(i, j)) in out.iter_mut().zip(&exps) {
                    let ip1 = T::from_usize_lossy(i + 1);
                    *slot = *slot + w * deta * xi.powi(i as i32 + 1) * eta.powi(j as i32) / ip1;
                }
            }
        }
    }
    let jac = scale[0] * scale[1];
    out.iter().map(|&v| v * jac).collect()
}

#[inline]
fn local<T: Real>(p: [T; 2], origin: [T; 2], scale: [T; 2]) -> [T; 2] {
    [(p[0] - origin[0]) / scale[0], (p[1] - origin[1]) / scale[1]]
}

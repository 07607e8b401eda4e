//! Adaptive Gauss-Kronrod quadrature along complex paths, and contour
//! integrals of meromorphic functions as sums of small loops around poles.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_subdivisions: 4000 }
    }
}

/// Integral value with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: Complex<T>,
    pub error: f64,
    pub evaluations: usize,
}

/// A parametrised path `z(t)`, `t` in `[0, 1]`.
#[derive(Clone, Copy, Debug)]
pub enum Path<T> {
    Segment {
        from: Complex<T>,
        to: Complex<T>,
    },
    /// Arc of a circle; angles in radians, traversed from `theta0` to `theta1`.
    Arc {
        center: Complex<T>,
        radius: T,
        theta0: T,
        theta1: T,
    },
}

impl<T: Real> Path<T> {
    /// Full counter-clockwise circle.
    pub fn circle(center: Complex<T>, radius: T) -> Self {
        Path::Arc { center, radius, theta0: T::zero(), theta1: T::TAU() }
    }

    /// Point and tangent `dz/dt` at parameter `t`.
    fn point(&self, t: T) -> (Complex<T>, Complex<T>) {
        match *self {
            Path::Segment { from, to } => (from + (to - from) * t, to - from),
            Path::Arc { center, radius, theta0, theta1 } => {
                let span = theta1 - theta0;
                let th = theta0 + span * t;
                let u = Complex::from_polar(T::one(), th);
                (center + u * radius, u * cplx(T::zero(), radius * span))
            }
        }
    }
}

fn gk15<T: Real, F>(f: &mut F, path: &Path<T>, a: T, b: T) -> Result<(Complex<T>, f64)>
where
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let half = (b - a) * T::lit(0.5);
    let mid = a + half;
    let mut eval = |t: T| -> Result<Complex<T>> {
        let (z, dz) = path.point(t);
        Ok(f(z)? * dz)
    };
    let fc = eval(mid)?;
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = eval(mid - dx)? + eval(mid + dx)?;
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    Ok((kron, (kron - gauss).norm().as_f64()))
}

/// Adaptive 15-point Gauss-Kronrod integral of `f(z) dz` along `path`.
pub fn integrate<T: Real, F>(path: &Path<T>, mut f: F, settings: &QuadSettings) -> Result<QuadResult<T>>
where
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let eps = T::epsilon().as_f64();
    let (v0, e0) = gk15(&mut f, path, T::zero(), T::one())?;
    let mut pieces = vec![(T::zero(), T::one(), v0, e0)];
    let mut evaluations = 15;
    loop {
        let total = pieces.iter().fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p.2);
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let target =
            settings.abs_tol.max(settings.rel_tol * total.norm().as_f64()).max(50.0 * eps * total.norm().as_f64());
        if err <= target {
            return Ok(QuadResult { value: total, error: err, evaluations });
        }
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Domain("non-finite integrand on contour".into()));
        }
        if pieces.len() >= settings.max_subdivisions {
            return Err(Error::Convergence { subdivisions: pieces.len(), error_estimate: err, target });
        }
        let (idx, _) = pieces.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (a, b, _, _) = pieces.swap_remove(idx);
        let m = (a + b) * T::lit(0.5);
        let (v1, e1) = gk15(&mut f, path, a, m)?;
        let (v2, e2) = gk15(&mut f, path, m, b)?;
        evaluations += 30;
        pieces.push((a, m, v1, e1));
        pieces.push((m, b, v2, e2));
    }
}

/// Half of the complex plane a real-line integral is closed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Upper,
    Lower,
}

impl HalfPlane {
    /// `+1` for counter-clockwise closure (upper), `-1` otherwise.
    pub fn orientation<T: Real>(self) -> T {
        match self {
            HalfPlane::Upper => T::one(),
            HalfPlane::Lower => -T::one(),
        }
    }

    pub fn contains<T: Real>(self, z: Complex<T>) -> bool {
        match self {
            HalfPlane::Upper => z.im > T::zero(),
            HalfPlane::Lower => z.im < T::zero(),
        }
    }
}

/// Counter-clockwise loops around groups of nearby poles.
#[derive(Clone, Debug)]
pub struct PoleLoops<T> {
    pub circles: Vec<(Complex<T>, T)>,
}

impl<T: Real> PoleLoops<T> {
    /// Builds loops enclosing every pole in `inside` and none in `outside`.
    ///
    /// Poles closer than `merge` share a loop. Each loop keeps at least a
    /// third of the gap to the nearest foreign pole free.
    pub fn new(inside: &[Complex<T>], outside: &[Complex<T>], merge: T) -> Result<Self> {
        let n = inside.len();
        let mut group: Vec<usize> = (0..n).collect();
        fn root(g: &mut [usize], mut i: usize) -> usize {
            while g[i] != i {
                g[i] = g[g[i]];
                i = g[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if (inside[i] - inside[j]).norm() < merge {
                    let (ri, rj) = (root(&mut group, i), root(&mut group, j));
                    group[ri] = rj;
                }
            }
        }
        let mut circles = Vec::new();
        for r in 0..n {
            if root(&mut group, r) != r {
                continue;
            }
            let members: Vec<Complex<T>> = (0..n).filter(|&i| root(&mut group, i) == r).map(|i| inside[i]).collect();
            let k = T::from_usize(members.len()).expect("small count");
            let center = members.iter().fold(Complex::new(T::zero(), T::zero()), |a, &z| a + z) / k;
            let spread = members.iter().map(|&z| (z - center).norm()).fold(T::zero(), T::max);
            let gap = inside
                .iter()
                .filter(|&&z| !members.contains(&z))
                .chain(outside.iter())
                .map(|&z| (z - center).norm() - spread)
                .fold(T::infinity(), T::min);
            if gap <= T::zero() {
                return Err(Error::Domain("excluded pole lies inside a pole cluster".into()));
            }
            let pad = (gap / T::lit(3.0)).min(merge.max(spread));
            circles.push((center, spread + pad));
        }
        Ok(Self { circles })
    }

    /// `sum of counter-clockwise loop integrals = 2 pi i * sum of residues`.
    pub fn integrate<F>(&self, mut f: F, settings: &QuadSettings) -> Result<QuadResult<T>>
    where
        F: FnMut(Complex<T>) -> Result<Complex<T>>,
    {
        let mut out = QuadResult { value: Complex::new(T::zero(), T::zero()), error: 0.0, evaluations: 0 };
        for &(c, r) in &self.circles {
            let q = integrate(&Path::circle(c, r), &mut f, settings)?;
            out.value = out.value + q.value;
            out.error += q.error;
            out.evaluations += q.evaluations;
        }
        Ok(out)
    }
}

/// Real-line integral of a meromorphic `f` that is closed in `half`:
/// `orientation * sum of loops around the poles of f in that half-plane`.
pub fn closed_line_integral<T: Real, F>(
    f: F,
    poles: &[Complex<T>],
    half: HalfPlane,
    merge: T,
    settings: &QuadSettings,
) -> Result<QuadResult<T>>
where
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let (inside, outside): (Vec<_>, Vec<_>) = poles.iter().partition(|&&z| half.contains(z));
    let loops = PoleLoops::new(&inside, &outside, merge)?;
    let mut q = loops.integrate(f, settings)?;
    q.value = q.value * half.orientation::<T>();
    Ok(q)
}

//! Dense states over labelled subsystems.
//!
//! Basis indices are row-major over the subsystem list: the first subsystem
//! is the most significant digit. Operators act on a named subset of
//! subsystems and are applied through index maps, so the full embedded
//! operator is never materialised.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type C<T> = Complex<T>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Subsystem {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered subsystem list of a state.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Dims(Vec<Subsystem>);

impl Dims {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        for (i, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::ZeroDimension(s.label.clone()));
            }
            if subsystems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(Dims(subsystems))
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(l, d)| Subsystem::new(l, d)).collect())
    }

    pub fn qubits(labels: &[&str]) -> Result<Self> {
        Self::new(labels.iter().map(|&l| Subsystem::new(l, 2)).collect())
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.0
    }

    pub fn labels(&self) -> Vec<&str> {
        self.0.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.0
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.0[self.position(label)?].dim)
    }

    pub fn concat(&self, other: &Dims) -> Result<Dims> {
        let mut all = self.0.clone();
        all.extend(other.0.iter().cloned());
        Dims::new(all)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1].dim;
        }
        strides
    }
}

/// Splits every basis index of `dims` into a (selected, rest) pair.
///
/// `selected` lists subsystem positions in the order the caller wants them
/// combined; the rest keep their original relative order. `table[s * rest + r]`
/// is the full index.
struct Split {
    sel_dim: usize,
    rest_dim: usize,
    table: Vec<usize>,
}

impl Split {
    fn new(dims: &Dims, selected: &[usize]) -> Self {
        let subs = dims.subsystems();
        let strides = dims.strides();
        let rest: Vec<usize> = (0..subs.len()).filter(|p| !selected.contains(p)).collect();
        let sel_dim: usize = selected.iter().map(|&p| subs[p].dim).product();
        let rest_dim: usize = rest.iter().map(|&p| subs[p].dim).product();
        let mut table = vec![0; sel_dim * rest_dim];
        for s in 0..sel_dim {
            let mut full = 0;
            let mut rem = s;
            for &p in selected.iter().rev() {
                full += (rem % subs[p].dim) * strides[p];
                rem /= subs[p].dim;
            }
            for r in 0..rest_dim {
                let mut idx = full;
                let mut rem = r;
                for &p in rest.iter().rev() {
                    idx += (rem % subs[p].dim) * strides[p];
                    rem /= subs[p].dim;
                }
                table[s * rest_dim + r] = idx;
            }
        }
        Split {
            sel_dim,
            rest_dim,
            table,
        }
    }

    #[inline]
    fn index(&self, s: usize, r: usize) -> usize {
        self.table[s * self.rest_dim + r]
    }
}

/// Operator acting on a subset of subsystems.
///
/// `matrix` is `rows x cols`, row-major, with columns indexed over the
/// `targets` in the order given and rows over `outputs`. For a local
/// operator the outputs are the targets themselves; an isometry may replace
/// the targets with differently shaped subsystems, which are inserted at the
/// position of the first target.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsystemOp<T> {
    matrix: Vec<C<T>>,
    rows: usize,
    cols: usize,
    targets: Vec<String>,
    outputs: Option<Vec<Subsystem>>,
}

impl<T: Real> SubsystemOp<T> {
    pub fn local(matrix: Vec<C<T>>, dim: usize, targets: &[&str]) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        Ok(SubsystemOp {
            matrix,
            rows: dim,
            cols: dim,
            targets: targets.iter().map(|s| s.to_string()).collect(),
            outputs: None,
        })
    }

    /// Local operator from a real row-major table.
    pub fn real(rows: &[&[f64]], targets: &[&str]) -> Result<Self> {
        let dim = rows.len();
        let mut matrix = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            matrix.extend(row.iter().map(|&x| C::new(T::lit(x), T::zero())));
        }
        Self::local(matrix, dim, targets)
    }

    pub fn isometry(
        matrix: Vec<C<T>>,
        rows: usize,
        cols: usize,
        targets: &[&str],
        outputs: Vec<Subsystem>,
    ) -> Result<Self> {
        if matrix.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: matrix.len(),
            });
        }
        let out_dim: usize = outputs.iter().map(|s| s.dim).product();
        if out_dim != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: out_dim,
            });
        }
        Ok(SubsystemOp {
            matrix,
            rows,
            cols,
            targets: targets.iter().map(|s| s.to_string()).collect(),
            outputs: Some(outputs),
        })
    }

    pub fn targets(&self) -> Vec<&str> {
        self.targets.iter().map(String::as_str).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> C<T> {
        self.matrix[row * self.cols + col]
    }

    /// Max deviation of `K^dagger K` from the identity.
    pub fn isometry_error(&self) -> T {
        let mut worst = T::zero();
        for a in 0..self.cols {
            for b in 0..self.cols {
                let mut acc: C<T> = C::zero();
                for r in 0..self.rows {
                    acc += self.entry(r, a).conj() * self.entry(r, b);
                }
                if a == b {
                    acc -= C::one();
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Max deviation of `P P` from `P`; infinite for non-square operators.
    pub fn idempotence_error(&self) -> T {
        if self.rows != self.cols {
            return T::infinity();
        }
        let n = self.rows;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc: C<T> = C::zero();
                for k in 0..n {
                    acc += self.entry(i, k) * self.entry(k, j);
                }
                worst = worst.max((acc - self.entry(i, j)).norm());
            }
        }
        worst
    }

    fn resolve(&self, dims: &Dims) -> Result<(Vec<usize>, Dims)> {
        let positions = self
            .targets
            .iter()
            .map(|l| dims.position(l))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in positions.iter().enumerate() {
            if positions[..i].contains(p) {
                return Err(Error::DuplicateLabel(self.targets[i].clone()));
            }
        }
        let in_dim: usize = positions.iter().map(|&p| dims.subsystems()[p].dim).product();
        if in_dim != self.cols {
            return Err(Error::DimensionMismatch {
                expected: in_dim,
                found: self.cols,
            });
        }
        let out_dims = match &self.outputs {
            None => dims.clone(),
            Some(outputs) => {
                let first = *positions.iter().min().unwrap_or(&0);
                let mut subs = Vec::new();
                for (p, s) in dims.subsystems().iter().enumerate() {
                    if p == first {
                        subs.extend(outputs.iter().cloned());
                    }
                    if !positions.contains(&p) {
                        subs.push(s.clone());
                    }
                }
                Dims::new(subs)?
            }
        };
        Ok((positions, out_dims))
    }

    fn output_positions(&self, out_dims: &Dims) -> Result<Vec<usize>> {
        match &self.outputs {
            None => self.targets.iter().map(|l| out_dims.position(l)).collect(),
            Some(outputs) => outputs.iter().map(|s| out_dims.position(&s.label)).collect(),
        }
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<C<T>>,
    dims: Dims,
}

impl<T: Real> PureState<T> {
    /// Builds a state from unnormalized amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<C<T>>, dims: Dims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if norm <= T::PROB_FLOOR {
            return Err(Error::ZeroNorm);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(PureState { amplitudes, dims })
    }

    pub fn from_real(amplitudes: &[f64], dims: Dims) -> Result<Self> {
        Self::from_amplitudes(
            amplitudes.iter().map(|&x| C::new(T::lit(x), T::zero())).collect(),
            dims,
        )
    }

    pub fn basis(dims: Dims, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: index,
            });
        }
        let mut amplitudes = vec![C::zero(); n];
        amplitudes[index] = C::one();
        Ok(PureState { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn tensor(&self, other: &PureState<T>) -> Result<Self> {
        let dims = self.dims.concat(&other.dims)?;
        let mut amplitudes = Vec::with_capacity(dims.total());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState { amplitudes, dims })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState<T>) -> Result<C<T>> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: other.dims.total(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `K|psi>`; the result is not renormalized, so a non-isometric `K` is
    /// rejected by the norm check.
    pub fn apply(&self, op: &SubsystemOp<T>) -> Result<Self> {
        let (positions, out_dims) = op.resolve(&self.dims)?;
        let out_positions = op.output_positions(&out_dims)?;
        let old = Split::new(&self.dims, &positions);
        let new = Split::new(&out_dims, &out_positions);
        let mut amplitudes = vec![C::zero(); out_dims.total()];
        for a in 0..new.sel_dim {
            for c in 0..old.sel_dim {
                let k = op.entry(a, c);
                if k.is_zero() {
                    continue;
                }
                for r in 0..old.rest_dim {
                    amplitudes[new.index(a, r)] += k * self.amplitudes[old.index(c, r)];
                }
            }
        }
        let out = PureState {
            amplitudes,
            dims: out_dims,
        };
        let norm: T = out.norm();
        if (norm - T::one()).abs() > T::EXACT_TOL.sqrt() {
            return Err(Error::NotNormalized(norm.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(out)
    }

    /// Reorders subsystems to `order` (a permutation of the current labels).
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        let positions = order
            .iter()
            .map(|l| self.dims.position(l))
            .collect::<Result<Vec<_>>>()?;
        if positions.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: positions.len(),
            });
        }
        let split = Split::new(&self.dims, &positions);
        let dims = Dims::new(
            positions
                .iter()
                .map(|&p| self.dims.subsystems()[p].clone())
                .collect(),
        )?;
        let amplitudes = (0..split.sel_dim)
            .map(|s| self.amplitudes[split.index(s, 0)])
            .collect();
        Ok(PureState { amplitudes, dims })
    }

    /// Max amplitude difference to `other`, which must have identical dims.
    pub fn max_abs_diff(&self, other: &PureState<T>) -> Result<T> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: other.dims.total(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    pub fn density(&self) -> MixedState<T> {
        MixedState::from_pure(self)
    }
}

/// Outcome of a projective measurement branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection<T> {
    pub probability: T,
    /// `None` when the probability is below the zero-probability floor.
    pub conditional: Option<MixedState<T>>,
}

/// Density matrix over labelled subsystems, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState<T> {
    matrix: Vec<C<T>>,
    dims: Dims,
}

impl<T: Real> MixedState<T> {
    pub fn from_matrix(matrix: Vec<C<T>>, dims: Dims) -> Result<Self> {
        let n = dims.total();
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: matrix.len(),
            });
        }
        Ok(MixedState { matrix, dims })
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        let n = psi.amplitudes.len();
        let mut matrix = Vec::with_capacity(n * n);
        for a in &psi.amplitudes {
            for b in &psi.amplitudes {
                matrix.push(a * b.conj());
            }
        }
        MixedState {
            matrix,
            dims: psi.dims.clone(),
        }
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let n = dims.total();
        let w = C::new(T::one() / T::from_usize(n).unwrap(), T::zero());
        let mut matrix = vec![C::zero(); n * n];
        for i in 0..n {
            matrix[i * n + i] = w;
        }
        MixedState { matrix, dims }
    }

    /// Convex (or any real-weighted) combination of states with equal dims.
    pub fn mixture(terms: &[(T, &MixedState<T>)]) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyKeep)?.1;
        let mut matrix = vec![C::zero(); first.matrix.len()];
        for (w, s) in terms {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch {
                    expected: first.dims.total(),
                    found: s.dims.total(),
                });
            }
            for (m, x) in matrix.iter_mut().zip(&s.matrix) {
                *m += x * *w;
            }
        }
        Ok(MixedState {
            matrix,
            dims: first.dims.clone(),
        })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn get(&self, row: usize, col: usize) -> C<T> {
        self.matrix[row * self.dim() + col]
    }

    pub fn trace(&self) -> T {
        let n = self.dim();
        (0..n).map(|i| self.matrix[i * n + i].re).fold(T::zero(), |a, b| a + b)
    }

    pub fn scaled(&self, factor: T) -> Self {
        MixedState {
            matrix: self.matrix.iter().map(|x| x * factor).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr.abs() <= T::PROB_FLOOR {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(T::one() / tr))
    }

    /// Max `|M - M^dagger|` entry.
    pub fn hermiticity_error(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &MixedState<T>) -> Result<T> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    /// Eigenvalues of the Hermitian part, ascending, in double precision.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let m = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
            let h = (self.get(i, j) + self.get(j, i).conj()) * T::lit(0.5);
            Complex::new(h.re.to_f64().unwrap(), h.im.to_f64().unwrap())
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Kronecker product; dims are concatenated.
    pub fn tensor(&self, other: &MixedState<T>) -> Result<Self> {
        let dims = self.dims.concat(&other.dims)?;
        let (na, nb) = (self.dim(), other.dim());
        let n = na * nb;
        let mut matrix = vec![C::zero(); n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..nb {
                    let row = (i * nb + k) * n + j * nb;
                    for l in 0..nb {
                        matrix[row + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Ok(MixedState { matrix, dims })
    }

    /// `K rho K^dagger` with `K` embedded as identity on the other subsystems.
    pub fn apply(&self, op: &SubsystemOp<T>) -> Result<Self> {
        let (positions, out_dims) = op.resolve(&self.dims)?;
        let out_positions = op.output_positions(&out_dims)?;
        let old = Split::new(&self.dims, &positions);
        let new = Split::new(&out_dims, &out_positions);
        let n_old = self.dim();
        let n_new = out_dims.total();

        // half[i'][j] = sum_c K[a][c] rho[old(c, r)][j]  with i' = new(a, r)
        let mut half: Vec<C<T>> = vec![C::zero(); n_new * n_old];
        for a in 0..new.sel_dim {
            for c in 0..old.sel_dim {
                let k = op.entry(a, c);
                if k.is_zero() {
                    continue;
                }
                for r in 0..old.rest_dim {
                    let dst = new.index(a, r) * n_old;
                    let src = old.index(c, r) * n_old;
                    for j in 0..n_old {
                        half[dst + j] += k * self.matrix[src + j];
                    }
                }
            }
        }

        // out[i'][new(b, s)] = sum_d half[i'][old(d, s)] conj(K[b][d])
        let mut matrix: Vec<C<T>> = vec![C::zero(); n_new * n_new];
        for b in 0..new.sel_dim {
            for d in 0..old.sel_dim {
                let k = op.entry(b, d).conj();
                if k.is_zero() {
                    continue;
                }
                for s in 0..old.rest_dim {
                    let dst = new.index(b, s);
                    let src = old.index(d, s);
                    for i in 0..n_new {
                        matrix[i * n_new + dst] += half[i * n_old + src] * k;
                    }
                }
            }
        }
        Ok(MixedState {
            matrix,
            dims: out_dims,
        })
    }

    /// Projects onto `projector`, returning the branch probability and, when it
    /// clears the zero-probability floor, the renormalized conditional state.
    pub fn project(&self, projector: &SubsystemOp<T>) -> Result<Projection<T>> {
        let err = projector.idempotence_error();
        if err > T::PSD_TOL {
            return Err(Error::NotIdempotent(err.to_f64().unwrap_or(f64::INFINITY)));
        }
        let branch = self.apply(projector)?;
        let probability = branch.trace();
        let conditional = if probability > T::PROB_FLOOR {
            Some(branch.scaled(T::one() / probability))
        } else {
            None
        };
        Ok(Projection {
            probability,
            conditional,
        })
    }

    /// Unnormalized `P rho P^dagger` (no idempotence check).
    pub fn branch(&self, projector: &SubsystemOp<T>) -> Result<Self> {
        self.apply(projector)
    }

    /// Traces out every subsystem not listed in `keep`; kept subsystems stay
    /// in their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut positions = keep
            .iter()
            .map(|l| self.dims.position(l))
            .collect::<Result<Vec<_>>>()?;
        positions.sort_unstable();
        positions.dedup();
        let split = Split::new(&self.dims, &positions);
        let dims = Dims::new(
            positions
                .iter()
                .map(|&p| self.dims.subsystems()[p].clone())
                .collect(),
        )?;
        let n = self.dim();
        let m = split.sel_dim;
        let mut matrix = vec![C::zero(); m * m];
        for a in 0..m {
            for b in 0..m {
                let mut acc: C<T> = C::zero();
                for t in 0..split.rest_dim {
                    acc += self.matrix[split.index(a, t) * n + split.index(b, t)];
                }
                matrix[a * m + b] = acc;
            }
        }
        Ok(MixedState { matrix, dims })
    }

    /// `<target|rho|target>`.
    pub fn fidelity_to(&self, target: &PureState<T>) -> Result<T> {
        if self.dims != target.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: target.dims.total(),
            });
        }
        Ok(self.expectation(target.amplitudes()).re)
    }

    /// `<v|rho|v>` for an arbitrary vector of matching length.
    pub fn expectation(&self, v: &[C<T>]) -> C<T> {
        self.sandwich(v, v)
    }

    /// `<u|rho|v>`.
    pub fn sandwich(&self, u: &[C<T>], v: &[C<T>]) -> C<T> {
        let n = self.dim();
        let mut acc: C<T> = C::zero();
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            let mut row = C::zero();
            for j in 0..n {
                row += self.matrix[i * n + j] * v[j];
            }
            acc += u[i].conj() * row;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_phi_plus() -> PureState<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_real(&[s, 0.0, 0.0, s], Dims::qubits(&["a", "b"]).unwrap()).unwrap()
    }

    fn hadamard(target: &str) -> SubsystemOp<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        SubsystemOp::real(&[&[s, s], &[s, -s]], &[target]).unwrap()
    }

    #[test]
    fn tensor_of_pure_states_is_rank_one() {
        let rho = bell_phi_plus().density();
        let both = rho
            .tensor(
                &MixedState::from_pure(
                    &PureState::from_real(
                        &[1.0, 0.0, 0.0, 1.0],
                        Dims::qubits(&["c", "d"]).unwrap(),
                    )
                    .unwrap(),
                ),
            )
            .unwrap();
        assert_eq!(both.dim(), 16);
        assert!((both.trace() - 1.0).abs() < 1e-12);
        let ev = both.eigenvalues();
        assert!((ev[15] - 1.0).abs() < 1e-12);
        assert!(ev[..15].iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn hadamard_maps_h_to_plus() {
        let dims = Dims::qubits(&["pol"]).unwrap();
        let h = PureState::<f64>::basis(dims.clone(), 0).unwrap().density();
        let out = h.apply(&hadamard("pol")).unwrap();
        let plus = PureState::from_real(&[1.0, 1.0], dims).unwrap();
        assert!((out.fidelity_to(&plus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_then_inverse_restores() {
        let rho = bell_phi_plus().density();
        let u = SubsystemOp::local(
            vec![
                C::new(0.6, 0.0),
                C::new(0.0, 0.8),
                C::new(0.0, 0.8),
                C::new(0.6, 0.0),
            ],
            2,
            &["b"],
        )
        .unwrap();
        assert!(u.isometry_error() < 1e-12);
        let udag = SubsystemOp::local(
            vec![
                C::new(0.6, 0.0),
                C::new(0.0, -0.8),
                C::new(0.0, -0.8),
                C::new(0.6, 0.0),
            ],
            2,
            &["b"],
        )
        .unwrap();
        let back = rho.apply(&u).unwrap().apply(&udag).unwrap();
        assert!(back.max_abs_diff(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn identity_projection_is_trivial() {
        let rho = bell_phi_plus().density();
        let id = SubsystemOp::real(&[&[1.0, 0.0], &[0.0, 1.0]], &["a"]).unwrap();
        let p = rho.project(&id).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-12);
        assert!(p.conditional.unwrap().max_abs_diff(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn bell_marginal_projection() {
        let rho = bell_phi_plus().density();
        let p00 = SubsystemOp::real(
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
            ],
            &["a", "b"],
        )
        .unwrap();
        let p = rho.project(&p00).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-12);
        let basis = PureState::basis(rho.dims().clone(), 0).unwrap().density();
        assert!(p.conditional.unwrap().max_abs_diff(&basis).unwrap() < 1e-12);
    }

    #[test]
    fn non_idempotent_projector_rejected() {
        let rho = bell_phi_plus().density();
        assert!(matches!(
            rho.project(&hadamard("a")),
            Err(Error::NotIdempotent(_))
        ));
    }

    #[test]
    fn zero_probability_branch_is_flagged() {
        let rho = bell_phi_plus().density();
        let p01 = SubsystemOp::real(
            &[
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
            ],
            &["a", "b"],
        )
        .unwrap();
        let p = rho.project(&p01).unwrap();
        assert!(p.probability.abs() < 1e-14);
        assert!(p.conditional.is_none());
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell_phi_plus().density();
        let a = rho.partial_trace(&["a"]).unwrap();
        let mm = MixedState::maximally_mixed(Dims::qubits(&["a"]).unwrap());
        assert!(a.max_abs_diff(&mm).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_of_maximally_mixed() {
        let mm = MixedState::maximally_mixed(Dims::qubits(&["a", "b"]).unwrap());
        assert!((mm.fidelity_to(&bell_phi_plus()).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn errors_on_bad_labels_and_dims() {
        let rho = bell_phi_plus().density();
        assert_eq!(
            rho.partial_trace(&["z"]),
            Err(Error::UnknownLabel("z".into()))
        );
        assert_eq!(rho.partial_trace(&[]), Err(Error::EmptyKeep));
        let wide = SubsystemOp::real(
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
            ],
            &["a"],
        )
        .unwrap();
        assert!(matches!(
            rho.apply(&wide),
            Err(Error::DimensionMismatch { .. })
        ));
        let other = PureState::<f64>::basis(Dims::qubits(&["x"]).unwrap(), 0).unwrap();
        assert!(rho.fidelity_to(&other).is_err());
        assert!(Dims::qubits(&["a", "a"]).is_err());
    }

    #[test]
    fn targets_in_reverse_order() {
        // CNOT with control b, target a, addressed as [b, a].
        let cnot = SubsystemOp::<f64>::real(
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0, 0.0],
            ],
            &["b", "a"],
        )
        .unwrap();
        let dims = Dims::qubits(&["a", "b"]).unwrap();
        // |a=0, b=1> -> |a=1, b=1>
        let psi = PureState::basis(dims.clone(), 1).unwrap();
        let out = psi.apply(&cnot).unwrap();
        let expected = PureState::basis(dims, 3).unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-12);
        let rho = psi.density().apply(&cnot).unwrap();
        assert!(rho.max_abs_diff(&expected.density()).unwrap() < 1e-12);
    }

    #[test]
    fn isometry_replaces_targets_in_place() {
        // qubit pair (x, y) relabelled as a single 4-level subsystem q.
        let mut m = vec![C::zero(); 16];
        for i in 0..4 {
            m[i * 4 + i] = C::one();
        }
        let op = SubsystemOp::<f64>::isometry(m, 4, 4, &["x", "y"], vec![Subsystem::new("q", 4)])
            .unwrap();
        let dims = Dims::qubits(&["w", "x", "y"]).unwrap();
        let rho = PureState::basis(dims, 3).unwrap().density();
        let out = rho.apply(&op).unwrap();
        assert_eq!(out.dims().labels(), vec!["w", "q"]);
        assert!((out.get(3, 3).re - 1.0).abs() < 1e-12);
    }
}

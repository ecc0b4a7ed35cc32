"""Dense brute-force reference engines in truncated Hilbert spaces.

Everything here validates covariance-level results against direct density
matrix algebra in small dense spaces, without assuming Gaussianity or
trusting the moment machinery under test. Runtimes are kept to seconds by
sparse operator algebra, exact superoperator exponentials for small
dimensions, and a matrix-free Krylov propagator for the larger ones.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import LinearOperator, expm_multiply

from ._util import max_abs
from .errors import DomainError, StructuralError, TruncationError
from .model import BOSONIC, FERMIONIC, GeneralizedLindbladModel

_DENSE_CUTOFF = 64          # below this dimension plain ndarrays beat sparse
_SUPEROP_CUTOFF = 32        # largest dimension for explicit superoperator exponentials
_MAX_DENSE_DIM = 4096


def _destroy(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def _embed(op: np.ndarray, mode: int, dims: list[int], sparse: bool):
    """Kronecker embedding of a single-mode operator at position ``mode``."""
    if sparse:
        out = sp.identity(1, format="csr", dtype=complex)
        for i, d in enumerate(dims):
            factor = sp.csr_matrix(op) if i == mode else sp.identity(d, format="csr", dtype=complex)
            out = sp.kron(out, factor, format="csr")
        return out
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        factor = op if i == mode else np.eye(d, dtype=complex)
        out = np.kron(out, factor)
    return out


def _dagger(op):
    if sp.issparse(op):
        return op.conj().T.tocsr()
    return op.conj().T


def _trace_product(a, rho: np.ndarray) -> complex:
    """Tr(a rho) for sparse or dense ``a``."""
    if sp.issparse(a):
        return complex((a @ rho).trace())
    return complex(np.trace(a @ rho))


class _DenseEngine:
    """Shared Liouvillian application, adjoint, and integrators."""

    dim: int
    hamiltonian_op: object
    f_ops: list
    gamma: np.ndarray
    mix_channels: bool = False

    def _finalize(self):
        self._f_dags = [_dagger(f) for f in self.f_ops]
        k = None
        for j in range(self.gamma.shape[0]):
            for kk in range(self.gamma.shape[1]):
                g = self.gamma[j, kk]
                if g == 0:
                    continue
                term = g * (self._f_dags[kk] @ self.f_ops[j])
                k = term if k is None else k + term
        if k is None:
            k = (sp.csr_matrix((self.dim, self.dim), dtype=complex)
                 if sp.issparse(self.hamiltonian_op) else np.zeros((self.dim, self.dim), complex))
        self._k_op = k
        self._sandwiches = self._build_sandwiches()
        self._superop = None
        self._norm_estimate = None

    def _build_sandwiches(self):
        """Weighted (op, op_dag) pairs whose sandwich sum forms the dissipator.

        Default is the direct double sum over the decoherence matrix. With
        ``mix_channels`` the Hermitian decoherence matrix is eigendecomposed
        and one channel per nonzero rate is used instead: the count drops
        from M^2 to M, which matters for the matrix-free integrator. The two
        applications are the same linear map (pinned by a test).
        """
        pairs = []
        if self.mix_channels:
            defect = max_abs(self.gamma - self.gamma.conj().T)
            if defect > 1e-12 * max(1.0, max_abs(self.gamma)):
                raise StructuralError(
                    "mix_channels requires a Hermitian decoherence matrix "
                    f"(defect {defect:.3e})"
                )
            herm = 0.5 * (self.gamma + self.gamma.conj().T)
            evals, vecs = np.linalg.eigh(herm)
            for l in range(evals.size):
                rate = float(evals[l])
                if abs(rate) < 1e-14:
                    continue
                op = None
                for j in range(len(self.f_ops)):
                    coeff = vecs[j, l]
                    if coeff == 0:
                        continue
                    term = coeff * self.f_ops[j]
                    op = term if op is None else op + term
                if op is not None:
                    pairs.append((rate, op, _dagger(op)))
            return pairs
        for j in range(self.gamma.shape[0]):
            for k in range(self.gamma.shape[1]):
                g = self.gamma[j, k]
                if g == 0:
                    continue
                pairs.append((g, self.f_ops[j], self._f_dags[k]))
        return pairs

    def liouvillian(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side of the master equation applied to a density matrix."""
        h = self.hamiltonian_op
        out = -1j * (h @ rho - rho @ h)
        for weight, op, op_dag in self._sandwiches:
            out = out + weight * ((op @ rho) @ op_dag)
        out = out - 0.5 * (self._k_op @ rho + rho @ self._k_op)
        return np.asarray(out)

    def liouvillian_adjoint(self, obs: np.ndarray) -> np.ndarray:
        """Adjoint generator acting on an observable (Heisenberg picture)."""
        h = self.hamiltonian_op
        out = 1j * (h @ obs - obs @ h)
        for weight, op, op_dag in self._sandwiches:
            out = out + weight * ((op_dag @ obs) @ op)
        out = out - 0.5 * (self._k_op @ obs + obs @ self._k_op)
        return np.asarray(out)

    def superoperator(self) -> np.ndarray:
        """Explicit matrix of the generator on row-major vectorized states."""
        if self.dim > _SUPEROP_CUTOFF:
            raise StructuralError(
                f"superoperator matrix limited to dimension {_SUPEROP_CUTOFF}, got {self.dim}"
            )
        if self._superop is None:
            d = self.dim
            ident = np.eye(d, dtype=complex)
            h = self.hamiltonian_op @ ident if sp.issparse(self.hamiltonian_op) else self.hamiltonian_op
            k_op = self._k_op @ ident if sp.issparse(self._k_op) else self._k_op
            sup = -1j * (np.kron(h, ident) - np.kron(ident, h.T))
            for weight, op, op_dag in self._sandwiches:
                left = op @ ident if sp.issparse(op) else op
                right = op_dag @ ident if sp.issparse(op_dag) else op_dag
                sup += weight * np.kron(left, right.T)
            sup -= 0.5 * (np.kron(k_op, ident) + np.kron(ident, k_op.T))
            self._superop = sup
        return self._superop

    def norm_estimate(self, iterations: int = 12, seed: int = 0) -> float:
        """Power-iteration estimate of the generator's operator norm."""
        if self._norm_estimate is None:
            rng = np.random.default_rng(seed)
            rho = rng.standard_normal((self.dim, self.dim)) + 1j * rng.standard_normal((self.dim, self.dim))
            rho /= np.linalg.norm(rho)
            norm = 1.0
            for _ in range(iterations):
                rho = self.liouvillian(rho)
                norm = np.linalg.norm(rho)
                if norm == 0:
                    break
                rho /= norm
            self._norm_estimate = max(float(norm), 1e-12)
        return self._norm_estimate

    def evolve(self, rho0: np.ndarray, times, method: str = "rk4") -> list[np.ndarray]:
        """Integrate the master equation through the grid; first time is rho0."""
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size == 0 or (times.size > 1 and np.min(np.diff(times)) <= 0):
            raise StructuralError("times must be non-empty and strictly increasing")
        rho0 = np.asarray(rho0, dtype=complex)
        if rho0.shape != (self.dim, self.dim):
            raise StructuralError(f"state must be {self.dim}x{self.dim}, got {rho0.shape}")
        if method == "rk4":
            return self._evolve_rk4(rho0, times)
        if method == "expm":
            return self._evolve_expm(rho0, times)
        if method == "krylov":
            return self._evolve_krylov(rho0, times)
        raise StructuralError(f"unknown dense integration method {method!r}")

    def _evolve_rk4(self, rho0, times) -> list[np.ndarray]:
        h_max = 1.0 / (50.0 * self.norm_estimate())
        out = [rho0]
        rho = rho0
        for i in range(1, times.size):
            span = times[i] - times[i - 1]
            steps = max(1, int(np.ceil(span / h_max)))
            h = span / steps
            for _ in range(steps):
                k1 = self.liouvillian(rho)
                k2 = self.liouvillian(rho + 0.5 * h * k1)
                k3 = self.liouvillian(rho + 0.5 * h * k2)
                k4 = self.liouvillian(rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out.append(rho)
        return out

    def _evolve_expm(self, rho0, times) -> list[np.ndarray]:
        sup = self.superoperator()
        out = [rho0]
        vec = rho0.reshape(-1)
        cache: dict[float, np.ndarray] = {}
        for i in range(1, times.size):
            dt = float(times[i] - times[i - 1])
            key = round(dt, 15)
            if key not in cache:
                cache[key] = expm(sup * dt)
            vec = cache[key] @ vec
            out.append(vec.reshape(self.dim, self.dim))
        return out

    def _evolve_krylov(self, rho0, times) -> list[np.ndarray]:
        d2 = self.dim * self.dim

        def matvec(v):
            return self.liouvillian(v.reshape(self.dim, self.dim)).reshape(-1)

        def rmatvec(v):
            # Matrix adjoint of the vectorized generator: dagger every
            # operator factor, which is the Heisenberg generator here.
            return self.liouvillian_adjoint(v.reshape(self.dim, self.dim)).reshape(-1)

        op = LinearOperator(shape=(d2, d2), matvec=matvec, rmatvec=rmatvec, dtype=complex)
        trace_a = self._superop_trace()
        v0 = rho0.reshape(-1)
        diffs = np.diff(times)
        if times.size > 2 and max_abs(diffs - diffs[0]) < 1e-12 * max(1.0, abs(float(diffs[0]))):
            span = float(times[-1] - times[0])
            rows = expm_multiply(op, v0, start=0.0, stop=span, num=times.size,
                                 endpoint=True, traceA=trace_a)
            return [row.reshape(self.dim, self.dim) for row in rows]
        out = [rho0]
        vec = v0
        for dt in diffs:
            vec = expm_multiply(op, vec, start=0.0, stop=float(dt), num=2,
                                endpoint=True, traceA=trace_a)[-1]
            out.append(vec.reshape(self.dim, self.dim))
        return out

    def _superop_trace(self) -> complex:
        d = self.dim
        total = 0.0 + 0.0j
        for weight, op, op_dag in self._sandwiches:
            total += weight * op.diagonal().sum() * op_dag.diagonal().sum()
        total -= d * self._k_op.diagonal().sum()
        return complex(total)


class DenseBosonicEngine(_DenseEngine):
    """Truncated Fock-space realization of a bosonic model."""

    def __init__(self, model: GeneralizedLindbladModel, fock_dim: int = 30,
                 truncation_threshold: float = 1e-8, mix_channels: bool = False):
        if model.flavor != BOSONIC:
            raise StructuralError(f"expected a bosonic model, got {model.flavor!r}")
        if fock_dim < 2:
            raise StructuralError("fock_dim must be at least 2")
        n = model.n_modes
        dim = fock_dim ** n
        if dim > _MAX_DENSE_DIM:
            raise StructuralError(
                f"dense dimension {dim} exceeds the limit {_MAX_DENSE_DIM}; "
                "reduce fock_dim or the mode count"
            )
        self.model = model
        self.fock_dim = fock_dim
        self.n_modes = n
        self.dim = dim
        self.truncation_threshold = truncation_threshold
        self.mix_channels = mix_channels
        sparse = dim > _DENSE_CUTOFF
        dims = [fock_dim] * n

        a_local = _destroy(fock_dim)
        sqrt_half = 1.0 / np.sqrt(2.0)
        self.x_ops = []
        for j in range(n):
            a_j = _embed(a_local, j, dims, sparse)
            a_dag = _dagger(a_j)
            self.x_ops.append(sqrt_half * (a_dag + a_j))            # q_j
            self.x_ops.append(1j * sqrt_half * (a_dag - a_j))       # p_j

        h = None
        for j in range(2 * n):
            for k in range(2 * n):
                coeff = model.hamiltonian[j, k]
                if coeff == 0:
                    continue
                term = 0.5 * coeff * (self.x_ops[j] @ self.x_ops[k])
                h = term if h is None else h + term
        if h is None:
            h = (sp.csr_matrix((dim, dim), dtype=complex) if sparse
                 else np.zeros((dim, dim), complex))
        self.hamiltonian_op = h

        self.f_ops = []
        for row in model.f:
            op = None
            for k, coeff in enumerate(row):
                if coeff == 0:
                    continue
                term = coeff * self.x_ops[k]
                op = term if op is None else op + term
            if op is None:
                op = (sp.csr_matrix((dim, dim), dtype=complex) if sparse
                      else np.zeros((dim, dim), complex))
            self.f_ops.append(op)
        self.gamma = model.gamma
        self._finalize()

    def vacuum(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def extract_mean_and_v(self, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """First moments and anticommutator covariance from a density matrix."""
        n2 = 2 * self.n_modes
        mean = np.array([_trace_product(x, rho).real for x in self.x_ops])
        v = np.zeros((n2, n2))
        for j in range(n2):
            xj_rho = self.x_ops[j] @ rho
            rho_xj = rho @ self.x_ops[j]
            for k in range(j, n2):
                sym = _trace_product(self.x_ops[k], np.asarray(xj_rho + rho_xj))
                v[j, k] = v[k, j] = sym.real - 2.0 * mean[j] * mean[k]
        return mean, v

    def truncation_diagnostic(self, rho: np.ndarray) -> float:
        """Largest per-mode population of the top two Fock levels."""
        pops = np.real(np.diag(rho)).reshape([self.fock_dim] * self.n_modes)
        worst = 0.0
        for mode in range(self.n_modes):
            moved = np.moveaxis(pops, mode, 0)
            worst = max(worst, float(np.sum(moved[-2:])))
        return worst

    def check_truncation(self, rho: np.ndarray):
        diag = self.truncation_diagnostic(rho)
        if diag > self.truncation_threshold:
            raise TruncationError(
                f"top-two Fock level population {diag:.3e} exceeds "
                f"{self.truncation_threshold:.1e}; increase fock_dim"
            )


def jordan_wigner_majoranas(n_modes: int) -> list[np.ndarray]:
    """Majorana operators on 2^n dimensions with anticommutator delta_jk."""
    if n_modes < 1:
        raise StructuralError("n_modes must be at least 1")
    z = np.diag([1.0, -1.0]).astype(complex)
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    ident = np.eye(2, dtype=complex)
    sqrt_half = 1.0 / np.sqrt(2.0)
    out = []
    for j in range(n_modes):
        c = np.eye(1, dtype=complex)
        for site in range(n_modes):
            if site < j:
                c = np.kron(c, z)
            elif site == j:
                c = np.kron(c, lower)
            else:
                c = np.kron(c, ident)
        c_dag = c.conj().T
        out.append(sqrt_half * (c_dag + c))
        out.append(-1j * sqrt_half * (c_dag - c))
    return out


class DenseFermionicEngine(_DenseEngine):
    """Jordan-Wigner realization of a fermionic model on 2^N dimensions."""

    def __init__(self, model: GeneralizedLindbladModel):
        if model.flavor != FERMIONIC:
            raise StructuralError(f"expected a fermionic model, got {model.flavor!r}")
        n = model.n_modes
        if n > 5:
            raise StructuralError("dense fermionic engine is limited to 5 modes")
        self.model = model
        self.n_modes = n
        self.dim = 2 ** n
        self.w_ops = jordan_wigner_majoranas(n)
        self._self_test()

        h = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(2 * n):
            for k in range(2 * n):
                coeff = model.hamiltonian[j, k]
                if coeff == 0:
                    continue
                h += 0.5j * coeff * (self.w_ops[j] @ self.w_ops[k])
        self.hamiltonian_op = h

        self.f_ops = []
        for row in model.f:
            op = np.zeros((self.dim, self.dim), dtype=complex)
            for k, coeff in enumerate(row):
                if coeff != 0:
                    op += coeff * self.w_ops[k]
            self.f_ops.append(op)
        self.gamma = model.gamma
        self._finalize()

    def _self_test(self, tol: float = 1e-13):
        ident = np.eye(self.dim)
        worst = 0.0
        for j, wj in enumerate(self.w_ops):
            for k, wk in enumerate(self.w_ops):
                delta = 1.0 if j == k else 0.0
                worst = max(worst, max_abs(wj @ wk + wk @ wj - delta * ident))
        if worst > tol:
            raise StructuralError(
                f"Majorana construction failed its anticommutator self-test ({worst:.3e})"
            )

    def maximally_mixed(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex) / self.dim

    def extract_sigma(self, rho: np.ndarray) -> np.ndarray:
        """Majorana commutator covariance from a density matrix."""
        n2 = 2 * self.n_modes
        sigma = np.zeros((n2, n2))
        for j in range(n2):
            for k in range(j + 1, n2):
                comm = self.w_ops[j] @ self.w_ops[k] - self.w_ops[k] @ self.w_ops[j]
                val = 1j * _trace_product(comm, rho)
                sigma[j, k] = val.real
                sigma[k, j] = -val.real
        return sigma


def dense_bosonic_engine(model: GeneralizedLindbladModel, fock_dim: int = 30,
                         truncation_threshold: float = 1e-8) -> DenseBosonicEngine:
    return DenseBosonicEngine(model, fock_dim, truncation_threshold)


def dense_fermionic_engine(model: GeneralizedLindbladModel) -> DenseFermionicEngine:
    return DenseFermionicEngine(model)


def _density_basis(dim: int) -> list[np.ndarray]:
    """A spanning set of density matrices for linearity checks."""
    out = []
    for m in range(dim):
        e_mm = np.zeros((dim, dim), complex)
        e_mm[m, m] = 1.0
        out.append(e_mm)
    for m in range(dim):
        for n_ in range(m + 1, dim):
            plus = np.zeros((dim, dim), complex)
            plus[m, m] = plus[n_, n_] = 0.5
            plus[m, n_] = plus[n_, m] = 0.5
            out.append(plus)
            phase = np.zeros((dim, dim), complex)
            phase[m, m] = phase[n_, n_] = 0.5
            phase[m, n_] = -0.5j
            phase[n_, m] = 0.5j
            out.append(phase)
    return out


def _standard_dissipator(l_op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    l_dag = l_op.conj().T
    return l_op @ rho @ l_dag - 0.5 * (l_dag @ l_op @ rho + rho @ l_dag @ l_op)


def _pair_dissipator(a: np.ndarray, b: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Cross dissipator: a rho b^dag minus half the anticommutator of b^dag a."""
    b_dag = b.conj().T
    return a @ rho @ b_dag - 0.5 * (b_dag @ a @ rho + rho @ b_dag @ a)


def dissipator_linearity_check(l_j: np.ndarray, l_k: np.ndarray,
                               alpha: complex, beta: complex,
                               reading: str = "notational") -> float:
    """Expand a dissipator of a linear combination into pair dissipators.

    ``reading`` selects how the printed dagger on the second argument of the
    cross terms is interpreted: "notational" treats it as already absorbed by
    the pair dissipator definition (this is the reading that makes the
    identity exact); "literal" passes the daggered operator in, which breaks
    the identity for non-Hermitian operators and is kept for the regression
    test that pins the distinction.
    """
    l_j = np.asarray(l_j, dtype=complex)
    l_k = np.asarray(l_k, dtype=complex)
    if l_j.shape != l_k.shape or l_j.ndim != 2 or l_j.shape[0] != l_j.shape[1]:
        raise StructuralError("operators must be square with matching shapes")
    if reading not in ("notational", "literal"):
        raise StructuralError(f"unknown reading {reading!r}")
    combined = alpha * l_j + beta * l_k
    worst = 0.0
    for rho in _density_basis(l_j.shape[0]):
        lhs = _standard_dissipator(combined, rho)
        rhs = (abs(alpha) ** 2 * _standard_dissipator(l_j, rho)
               + abs(beta) ** 2 * _standard_dissipator(l_k, rho))
        if reading == "notational":
            rhs += alpha * np.conj(beta) * _pair_dissipator(l_j, l_k, rho)
            rhs += np.conj(alpha) * beta * _pair_dissipator(l_k, l_j, rho)
        else:
            rhs += alpha * np.conj(beta) * _pair_dissipator(l_j, l_k.conj().T, rho)
            rhs += np.conj(alpha) * beta * _pair_dissipator(l_k, l_j.conj().T, rho)
        worst = max(worst, max_abs(lhs - rhs))
    return worst


def adjoint_consistency_check(engine: _DenseEngine, observable: np.ndarray,
                              state: np.ndarray) -> float:
    """|Tr(O L rho) - Tr((L^dag O) rho)| for the engine's generator."""
    forward = np.trace(observable @ engine.liouvillian(state))
    backward = np.trace(engine.liouvillian_adjoint(observable) @ state)
    return float(abs(forward - backward))


def trace_preservation_check(engine: _DenseEngine, samples: int = 4, seed: int = 3) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        rho = random_density(rng, engine.dim)
        worst = max(worst, abs(complex(np.trace(engine.liouvillian(rho)))))
    return worst


def hermiticity_preservation_check(engine: _DenseEngine, samples: int = 4, seed: int = 4) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        rho = random_density(rng, engine.dim)
        out = engine.liouvillian(rho)
        worst = max(worst, max_abs(out - out.conj().T))
    return worst


def moment_closure_check(model: GeneralizedLindbladModel, fock_dim: int = 20,
                         seed: int = 7) -> dict[str, float]:
    """Compare dense moment derivatives at t = 0 with the drift/diffusion form.

    The test state is a random density matrix supported away from the Fock
    truncation edge (bosonic) or fully generic (fermionic), so the dense side
    never trusts the covariance machinery being validated.
    """
    from . import bosonic as _bosonic
    from . import fermionic as _fermionic

    rng = np.random.default_rng(seed)
    if model.flavor == BOSONIC:
        engine = DenseBosonicEngine(model, fock_dim)
        support = max(2, fock_dim // 2 - 2)
        rho = _supported_density(rng, engine, support)
        mean, v = engine.extract_mean_and_v(rho)
        rho_dot = engine.liouvillian(rho)
        n2 = 2 * model.n_modes
        dmean = np.array([_trace_product(x, rho_dot).real for x in engine.x_ops])
        dv = np.zeros((n2, n2))
        for j in range(n2):
            xj_dot = engine.x_ops[j] @ rho_dot
            dot_xj = rho_dot @ engine.x_ops[j]
            for k in range(j, n2):
                sym = _trace_product(engine.x_ops[k], np.asarray(xj_dot + dot_xj)).real
                dv[j, k] = dv[k, j] = sym - 2.0 * (dmean[j] * mean[k] + mean[j] * dmean[k])
        dd = _bosonic.build_drift_diffusion(model)
        return {
            "mean": max_abs(dmean - dd.a @ mean),
            "covariance": max_abs(dv - (dd.a @ v + v @ dd.a.T + dd.d)),
        }

    engine = DenseFermionicEngine(model)
    rho = random_density(rng, engine.dim)
    rho = 0.5 * (rho + _parity_reflect(rho, model.n_modes))   # keep the state parity even
    rho /= np.trace(rho).real
    sigma = engine.extract_sigma(rho)
    rho_dot = engine.liouvillian(rho)
    n2 = 2 * model.n_modes
    dsigma = np.zeros((n2, n2))
    for j in range(n2):
        for k in range(j + 1, n2):
            comm = engine.w_ops[j] @ engine.w_ops[k] - engine.w_ops[k] @ engine.w_ops[j]
            val = (1j * _trace_product(comm, rho_dot)).real
            dsigma[j, k] = val
            dsigma[k, j] = -val
    dd = _fermionic.build_drift_diffusion(model)
    return {"covariance": max_abs(dsigma - (dd.x @ sigma + sigma @ dd.x.T + dd.y))}


def _parity_reflect(rho: np.ndarray, n_modes: int) -> np.ndarray:
    parity = np.ones(1)
    for _ in range(n_modes):
        parity = np.kron(parity, np.array([1.0, -1.0]))
    p = np.diag(parity).astype(complex)
    return p @ rho @ p


def _supported_density(rng, engine: DenseBosonicEngine, support: int) -> np.ndarray:
    idx = [i for i in range(engine.dim)
           if all(n < support for n in np.unravel_index(i, [engine.fock_dim] * engine.n_modes))]
    block = rng.standard_normal((len(idx), len(idx))) + 1j * rng.standard_normal((len(idx), len(idx)))
    block = block @ block.conj().T
    rho = np.zeros((engine.dim, engine.dim), dtype=complex)
    rho[np.ix_(idx, idx)] = block / np.trace(block).real
    return rho


def random_density(rng, dim: int) -> np.ndarray:
    mat = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = mat @ mat.conj().T
    return rho / np.trace(rho).real


def dense_negativity_bosonic(rho: np.ndarray, dims: tuple[int, int]) -> float:
    """ln of the trace norm of the partial transpose over the second mode."""
    rho = np.asarray(rho, dtype=complex)
    d1, d2 = dims
    if rho.shape != (d1 * d2, d1 * d2):
        raise StructuralError(f"state must be {(d1 * d2, d1 * d2)}, got {rho.shape}")
    if max_abs(rho - rho.conj().T) > 1e-10 * max(1.0, max_abs(rho)):
        raise StructuralError("state must be Hermitian")
    pt = rho.reshape(d1, d2, d1, d2).transpose(0, 3, 2, 1).reshape(d1 * d2, d1 * d2)
    eigs = np.linalg.eigvalsh(pt)
    return float(np.log(np.sum(np.abs(eigs))))


def dense_negativity_fermionic(rho: np.ndarray, parity_tol: float = 1e-10) -> float:
    """ln of the trace norm of the partial time-reversal over the second mode.

    The density matrix is expanded in ordered Majorana monomials; partial
    time-reversal multiplies every second-mode Majorana factor by i. Works
    for any parity-even two-mode state, Gaussian or not.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise StructuralError(f"expected a two-mode (4x4) state, got shape {rho.shape}")
    w = jordan_wigner_majoranas(2)
    transformed = np.zeros((4, 4), dtype=complex)
    odd_weight = 0.0
    for eps in range(16):
        bits = [(eps >> b) & 1 for b in range(4)]
        monomial = np.eye(4, dtype=complex)
        for b in range(4):
            if bits[b]:
                monomial = monomial @ w[b]
        weight = sum(bits)
        coeff = complex(np.trace(monomial.conj().T @ rho)) * (2.0 ** weight) / 4.0
        if weight % 2 == 1:
            odd_weight = max(odd_weight, abs(coeff))
            continue
        phase = 1j ** (bits[2] + bits[3])
        transformed += coeff * phase * monomial
    if odd_weight > parity_tol * max(1.0, max_abs(rho)):
        raise DomainError(
            f"state is not parity even (odd Majorana weight {odd_weight:.3e})"
        )
    singular = np.linalg.svd(transformed, compute_uv=False)
    return float(np.log(np.sum(singular)))


def fock_thermal(nbar: float, dim: int) -> np.ndarray:
    """Truncated single-mode thermal state, renormalized on the truncation."""
    if nbar < 0:
        raise StructuralError("nbar must be nonnegative")
    if nbar == 0:
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    x = nbar / (nbar + 1.0)
    p = x ** np.arange(dim)
    p /= p.sum()
    return np.diag(p).astype(complex)


def fock_squeezed_vacuum(r: float, dim: int) -> np.ndarray:
    """Truncated single-mode squeezed vacuum with quadrature variances e^{-2r}, e^{2r}."""
    a = _destroy(dim)
    squeeze = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    psi = squeeze[:, 0]
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def fock_tmsv(r: float, dim: int) -> np.ndarray:
    """Truncated two-mode squeezed vacuum, renormalized on the truncation."""
    amps = np.tanh(r) ** np.arange(dim)
    psi = np.zeros(dim * dim, dtype=complex)
    for n in range(dim):
        psi[n * dim + n] = amps[n]
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def fermionic_gibbs_state(kernel, n_modes: int) -> np.ndarray:
    """Dense thermal state of an antisymmetric Majorana kernel.

    Sign convention matches the covariance mapping: the measured covariance
    of the returned state is blockwise tanh(kappa / 2) of the kernel.
    """
    from .fermionic import GibbsKernel

    k = kernel.k if isinstance(kernel, GibbsKernel) else np.asarray(kernel, dtype=float)
    if k.shape != (2 * n_modes, 2 * n_modes):
        raise StructuralError(f"kernel must be {2 * n_modes}x{2 * n_modes}, got {k.shape}")
    w = jordan_wigner_majoranas(n_modes)
    quad = np.zeros((2 ** n_modes, 2 ** n_modes), dtype=complex)
    for j in range(2 * n_modes):
        for kk in range(2 * n_modes):
            if k[j, kk] != 0:
                quad += 0.5j * k[j, kk] * (w[j] @ w[kk])
    rho = expm(quad)
    return rho / np.trace(rho).real

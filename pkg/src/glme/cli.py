"""Command-line front end.

Exit codes: 0 success, 1 domain or physics failure, 2 input or parse
failure. Every error path emits a machine-readable JSON object
{"error", "code", "detail"} on stderr.
"""

from __future__ import annotations

import functools
import os
import sys

import click
import numpy as np

from . import bosonic, entanglement, fermionic, io, lyapunov, oracle, reservoir
from .errors import (
    DomainError,
    EvaluationError,
    GlmeError,
    NumericalError,
    ParseError,
    PositivityError,
    StabilityError,
    StructuralError,
    TruncationError,
)
from .model import BOSONIC, FERMIONIC, validate_model

_TOL_NAMES = {
    "validate": 1e-10,
    "hurwitz": lyapunov.DEFAULT_HURWITZ_TOL,
    "residual": lyapunov.DEFAULT_RESIDUAL_TOL,
    "quad": lyapunov.DEFAULT_ODE_TOL,
    "physicality": 1e-9,
    "boundary": 1e-9,
    "oracle": 1e-8,
    "freq": -1.0,  # negative means: derive from the coupling table
}

_ERROR_CODES = {
    ParseError: ("parse", 2),
    StabilityError: ("stability", 1),
    PositivityError: ("positivity", 1),
    TruncationError: ("truncation", 1),
    EvaluationError: ("spectral", 1),
    NumericalError: ("numerical", 1),
    DomainError: ("domain", 1),
    StructuralError: ("structure", 1),
}


def _tolerances(tol_options: tuple[str, ...]) -> dict[str, float]:
    tols = dict(_TOL_NAMES)
    env = os.environ.get("GLME_DEFAULT_TOL")
    if env is not None:
        try:
            base = float(env)
        except ValueError:
            raise ParseError(f"GLME_DEFAULT_TOL must be a float, got {env!r}")
        for name in ("validate", "hurwitz", "residual", "physicality", "boundary"):
            tols[name] = base
    for item in tol_options:
        if "=" not in item:
            raise click.UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        name, _, value = item.partition("=")
        if name not in tols:
            raise click.UsageError(f"unknown tolerance {name!r}; known: {sorted(tols)}")
        try:
            tols[name] = float(value)
        except ValueError:
            raise click.UsageError(f"tolerance {name!r} needs a float value, got {value!r}")
    return tols


def _fail(code_name: str, exit_code: int, detail: str):
    sys.stderr.write(io.dumps({"error": True, "code": code_name, "detail": detail}) + "\n")
    sys.exit(exit_code)


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GlmeError as exc:
            for klass, (name, exit_code) in _ERROR_CODES.items():
                if isinstance(exc, klass):
                    _fail(name, exit_code, str(exc))
            _fail("error", 1, str(exc))
    return wrapper


def _emit(payload: dict):
    click.echo(io.dumps(payload))


def _write_output(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        io.atomic_write(path, text)


def _time_grid(t_final: float, steps: int, times_path: str | None) -> np.ndarray:
    if times_path is not None:
        try:
            with open(times_path) as handle:
                values = [float(line) for line in handle.read().split()]
        except OSError as exc:
            raise ParseError(f"{times_path}: {exc}")
        except ValueError as exc:
            raise ParseError(f"{times_path}: {exc}")
        if not values:
            raise ParseError(f"{times_path}: no times found")
        return np.asarray(values, dtype=float)
    if t_final <= 0:
        raise DomainError("t-final must be positive")
    if steps < 1:
        raise DomainError("steps must be at least 1")
    return np.linspace(0.0, t_final, steps + 1)


@click.group()
def main():
    """Simulate linear open quantum systems with cross-damping."""


@main.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", "tol_options", multiple=True, help="Override a named tolerance, NAME=VALUE.")
@_handle_errors
def validate(model_path, tol_options):
    """Validate a model file and print its report."""
    tols = _tolerances(tol_options)
    model = io.load_model(model_path)
    report = validate_model(model, tols["validate"])
    _emit({
        "hermitian_defect": report.hermitian_defect,
        "min_gamma_eigenvalue": report.min_gamma_eigenvalue,
        "hamiltonian_symmetry_defect": report.hamiltonian_symmetry_defect,
        "is_valid": report.is_valid,
    })
    if not report.is_valid:
        sys.exit(1)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--t-final", type=float, default=1.0, show_default=True)
@click.option("--steps", type=int, default=100, show_default=True)
@click.option("--method", type=click.Choice(["exact", "rk4"]), default="exact", show_default=True)
@click.option("--times", "times_path", type=click.Path(exists=True, dir_okay=False),
              help="File of explicit times, one per line (overrides --t-final/--steps).")
@click.option("--state", "state_path", type=click.Path(exists=True, dir_okay=False),
              help="Initial state file; defaults to vacuum (bosonic) or maximally mixed (fermionic).")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Trajectory file; '-' or absent writes to stdout.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--tol", "tol_options", multiple=True)
@_handle_errors
def evolve(model_path, t_final, steps, method, times_path, state_path, output, fmt, tol_options):
    """Propagate a model's moments and write the trajectory."""
    tols = _tolerances(tol_options)
    model = io.load_model(model_path)
    times = _time_grid(t_final, steps, times_path)
    initial = io.load_state(state_path) if state_path else None

    if model.flavor == BOSONIC:
        dd = bosonic.build_drift_diffusion(model, tols["validate"])
        if initial is None:
            v0 = np.eye(2 * model.n_modes)
            mean0 = None
        elif isinstance(initial, bosonic.GaussianState):
            v0, mean0 = initial.v, initial.mean
        else:
            raise StructuralError("initial state flavor does not match the model")
        trajectory = bosonic.propagate_covariance(
            dd, v0, times, method=method, mean0=mean0,
            hurwitz_tol=tols["hurwitz"], residual_tol=tols["residual"], ode_tol=tols["quad"],
        )
        text = (io.bosonic_trajectory_csv(trajectory) if fmt == "csv"
                else io.bosonic_trajectory_json(trajectory))
        _write_output(output, text)
        final = trajectory.states[-1]
        margin = min(bosonic.check_physicality(s.v, tols["physicality"])[1]
                     for s in trajectory.states)
        _emit({"final_purity": bosonic.purity(final.v), "physicality_margin": margin})
    else:
        dd = fermionic.build_drift_diffusion(model, tols["validate"])
        if initial is None:
            sigma0 = np.zeros((2 * model.n_modes, 2 * model.n_modes))
        elif isinstance(initial, fermionic.FermionicGaussianState):
            sigma0 = initial.sigma
        else:
            raise StructuralError("initial state flavor does not match the model")
        states = fermionic.propagate_covariance(
            dd, sigma0, times, method=method,
            hurwitz_tol=tols["hurwitz"], residual_tol=tols["residual"], ode_tol=tols["quad"],
        )
        text = (io.fermionic_trajectory_csv(times, states) if fmt == "csv"
                else io.fermionic_trajectory_json(times, states))
        _write_output(output, text)
        margin = min(1.0 - fermionic.check_physicality(s.sigma, tols["physicality"])[1]
                     for s in states)
        _emit({"final_purity": fermionic.purity(states[-1].sigma), "physicality_margin": margin})


@main.command("steady-state")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", "tol_options", multiple=True)
@_handle_errors
def steady_state_cmd(model_path, tol_options):
    """Solve for the steady state and report the residual."""
    tols = _tolerances(tol_options)
    model = io.load_model(model_path)
    if model.flavor == BOSONIC:
        dd = bosonic.build_drift_diffusion(model, tols["validate"])
        _, abscissa = bosonic.is_hurwitz(dd, tols["hurwitz"])
        state = bosonic.steady_state(dd, tols["hurwitz"], tols["residual"])
        residual = float(np.max(np.abs(dd.a @ state.v + state.v @ dd.a.T + dd.d)))
        _emit({"V_ss": state.v, "residual": residual, "spectral_abscissa": abscissa})
    else:
        dd = fermionic.build_drift_diffusion(model, tols["validate"])
        _, abscissa = fermionic.is_hurwitz(dd, tols["hurwitz"])
        state = fermionic.steady_state(dd, tols["hurwitz"], tols["residual"])
        residual = float(np.max(np.abs(dd.x @ state.sigma + state.sigma @ dd.x.T + dd.y)))
        _emit({"sigma_ss": state.sigma, "residual": residual, "spectral_abscissa": abscissa})


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--state", "state_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--measure", type=click.Choice(["duan", "logneg"]), required=True)
@click.option("--alpha", type=float, default=None, help="Duan coefficient; flavor-specific default.")
@click.option("--beta", type=float, default=None, help="Duan coefficient; flavor-specific default.")
@click.option("--strict-paper", is_flag=True, default=False,
              help="Use the -ln(2 eta) bosonic negativity variant.")
@click.option("--tol", "tol_options", multiple=True)
@_handle_errors
def entanglement_cmd(model_path, state_path, measure, alpha, beta, strict_paper, tol_options):
    """Entanglement measures for a two-mode state or model steady state."""
    tols = _tolerances(tol_options)
    if (model_path is None) == (state_path is None):
        raise click.UsageError("provide exactly one of --model or --state")
    if model_path is not None:
        model = io.load_model(model_path)
        if model.n_modes != 2:
            raise DomainError(f"entanglement measures need two modes, got {model.n_modes}")
        if model.flavor == BOSONIC:
            dd = bosonic.build_drift_diffusion(model, tols["validate"])
            state = bosonic.steady_state(dd, tols["hurwitz"], tols["residual"])
        else:
            dd = fermionic.build_drift_diffusion(model, tols["validate"])
            state = fermionic.steady_state(dd, tols["hurwitz"], tols["residual"])
    else:
        state = io.load_state(state_path)

    if isinstance(state, bosonic.GaussianState):
        if state.n_modes != 2:
            raise DomainError(f"entanglement measures need two modes, got {state.n_modes}")
        if measure == "duan":
            result = entanglement.duan_bosonic(
                state,
                alpha=1.0 if alpha is None else alpha,
                beta=-1.0 if beta is None else beta,
            )
            _emit({"measure": "duan", "value": result.quantity, "bound": result.bound,
                   "entangled": result.entangled_flag})
        else:
            result = entanglement.log_negativity_bosonic(state.v, strict_paper=strict_paper)
            _emit({"measure": "logneg", "value": result.value,
                   "spectrum": result.auxiliary_spectrum})
    else:
        if state.n_modes != 2:
            raise DomainError(f"entanglement measures need two modes, got {state.n_modes}")
        if measure == "duan":
            result = entanglement.duan_fermionic(
                state.sigma,
                alpha=1.0 if alpha is None else alpha,
                beta=1.0 if beta is None else beta,
            )
            _emit({"measure": "duan", "value": result.quantity, "bound": result.bound,
                   "entangled": result.entangled_flag})
        else:
            result = entanglement.log_negativity_fermionic(state.sigma)
            _emit({"measure": "logneg", "value": result.value,
                   "spectrum": result.auxiliary_spectrum})


@main.command()
@click.option("--couplings", "couplings_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--spectral", "spectral_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@click.option("--flavor", type=click.Choice([BOSONIC, FERMIONIC]), default=BOSONIC,
              show_default=True)
@click.option("--tol", "tol_options", multiple=True)
@_handle_errors
def assemble(couplings_path, spectral_path, output, flavor, tol_options):
    """Build a model file from microscopic couplings and reservoir spectra."""
    tols = _tolerances(tol_options)
    table = io.load_coupling_table(couplings_path)
    spectral = io.load_spectral(spectral_path)
    tol_freq = tols["freq"] if tols["freq"] >= 0 else None
    model = reservoir.assemble_model(table, spectral, flavor=flavor, tol_freq=tol_freq)
    io.save_model(model, output)
    report = validate_model(model, tols["validate"])
    _emit({"written": output, "n_modes": model.n_modes,
           "min_gamma_eigenvalue": report.min_gamma_eigenvalue, "is_valid": report.is_valid})


@main.command("oracle-check")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--fock-dim", type=int, default=20, show_default=True,
              help="Per-mode truncation for bosonic dense checks.")
@click.option("--tol", "tol_options", multiple=True)
@_handle_errors
def oracle_check(model_path, fock_dim, tol_options):
    """Run dense brute-force consistency checks against a model."""
    tols = _tolerances(tol_options)
    model = io.load_model(model_path)
    threshold = tols["oracle"]
    if model.flavor == BOSONIC:
        engine = oracle.DenseBosonicEngine(model, fock_dim)
    else:
        engine = oracle.DenseFermionicEngine(model)
    rng = np.random.default_rng(11)
    observable = oracle.random_density(rng, engine.dim)
    observable = observable + observable.conj().T
    state = oracle.random_density(rng, engine.dim)
    deviations = {
        "trace_preservation": oracle.trace_preservation_check(engine),
        "hermiticity_preservation": oracle.hermiticity_preservation_check(engine),
        "adjoint_consistency": oracle.adjoint_consistency_check(engine, observable, state),
    }
    closure = oracle.moment_closure_check(model, fock_dim=fock_dim)
    for key, value in closure.items():
        deviations[f"moment_closure_{key}"] = value
    passed = all(value <= threshold for value in deviations.values())
    _emit({"deviations": deviations, "threshold": threshold, "passed": passed})
    if not passed:
        sys.exit(1)


if __name__ == "__main__":
    main()

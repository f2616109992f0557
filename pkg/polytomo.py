#!/usr/bin/env python3
"""polytomo — polyhedron tomography protocols: simulation, reconstruction, loss statistics."""

from __future__ import annotations

import logging
import signal
import sys
from pathlib import Path
from types import FrameType
from typing import Any, Optional

import click
from rich.logging import RichHandler

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from app import AppContext  # noqa: E402
from config import (  # noqa: E402
    DEFAULT_ALPHA,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_RESOLUTION_DEG,
    DEFAULT_SAMPLE_SIZE,
    EXIT_NUMERIC,
    EXIT_USAGE,
)
from exceptions import ContractError, DataLoadError, ExportError, PolytomoError  # noqa: E402
from models import STATE_KINDS, PolyhedronKind, StateSpec  # noqa: E402
from ui import terminal as ui  # noqa: E402
from ui.terminal import console  # noqa: E402

logger = logging.getLogger(__name__)


def _setup_logging(verbose: bool = False, log_file: Optional[Path] = None) -> None:
    """Configure logging."""
    level = logging.DEBUG if verbose else logging.WARNING
    handlers: list[logging.Handler] = [
        RichHandler(console=console, show_path=False, rich_tracebacks=verbose),
    ]
    if log_file is not None:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s")
        )
        handlers.append(file_handler)
    logging.basicConfig(level=level, format="%(message)s", handlers=handlers, force=True)


def exit_code_for(exc: PolytomoError) -> int:
    if isinstance(exc, (ContractError, DataLoadError, ExportError)):
        return EXIT_USAGE
    return EXIT_NUMERIC


class PolytomoGroup(click.Group):
    """Turns domain errors into an error line and the documented exit code."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except PolytomoError as exc:
            logger.debug("Command failed", exc_info=True)
            ui.show_error(str(exc))
            ctx.exit(exit_code_for(exc))


class PolyhedronType(click.ParamType):
    name = "polyhedron"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> PolyhedronKind:
        if isinstance(value, PolyhedronKind):
            return value
        try:
            return PolyhedronKind.parse(str(value))
        except ContractError as exc:
            self.fail(str(exc), param, ctx)


POLYHEDRON = PolyhedronType()
PROTOCOL_FILE = click.option(
    "--protocol-file", type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None, help="Instrumental matrix JSON used instead of the catalog protocol",
)


def state_options(func: Any) -> Any:
    """--state/--f/--state-seed shared by commands that build a named state."""
    func = click.option(
        "--state-seed", type=int, default=None, help="Seed of a random pure state"
    )(func)
    func = click.option(
        "--f", "weight", type=float, default=None, help="White-noise weight in [0, 1]"
    )(func)
    func = click.option(
        "--state", "state_kind", type=click.Choice(STATE_KINDS), default="pure-random",
        show_default=True, help="Named true state",
    )(func)
    return func


def _state(state_kind: str, weight: Optional[float], state_seed: Optional[int]) -> StateSpec:
    return StateSpec(kind=state_kind, f=weight, seed=state_seed)


@click.group(cls=PolytomoGroup)
@click.option("--verbose", is_flag=True, help="Enable debug logging")
@click.option("--log-file", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write log records to this file")
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Worker processes for batches and restarts [default: 1]")
@click.option("--seed", type=int, default=None, help="Master seed [default: 0]")
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path),
              default=DEFAULT_OUTPUT_DIR, show_default=True,
              help="Directory for outputs without an explicit path")
@click.pass_context
def cli(
    ctx: click.Context,
    verbose: bool,
    log_file: Optional[Path],
    workers: Optional[int],
    seed: Optional[int],
    output_dir: Path,
) -> None:
    """polytomo — quantum state tomography with polyhedron measurement protocols."""
    _setup_logging(verbose, log_file)
    ctx.obj = AppContext(workers=workers, seed=seed, output_dir=output_dir)


# ── Protocols ────────────────────────────────────────────────

@cli.command()
@click.argument("kind", type=POLYHEDRON)
@click.argument("qubits", type=click.IntRange(min=1), default=1)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also save the instrumental matrix as JSON")
@click.pass_obj
def protocol(app: AppContext, kind: PolyhedronKind, qubits: int, out: Optional[Path]) -> None:
    """Completeness, decomposition of unity and adequacy dof of a protocol."""
    from commands.protocol_cmd import run_protocol
    run_protocol(app, kind, qubits, out)


@cli.command()
@click.argument("qubits", type=click.IntRange(min=1))
@click.argument("rank", type=click.IntRange(min=1))
def bounds(qubits: int, rank: int) -> None:
    """Optimal and polyhedron lower bounds of the scaled loss."""
    from commands.protocol_cmd import run_bounds
    run_bounds(qubits, rank)


@cli.command()
@click.argument("kind", type=POLYHEDRON)
@click.option("--resolution", type=float, default=DEFAULT_RESOLUTION_DEG, show_default=True,
              help="Grid step in degrees")
@click.option("--qubits", type=click.IntRange(min=1), default=1, show_default=True,
              help="More than one runs the multi-start extremal search")
@click.option("--restarts", type=click.IntRange(min=1), default=None,
              help="Restart budget of the extremal search")
@click.option("--no-refine", is_flag=True, help="Report grid extremes without refinement")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Output CSV (grid) or JSON (extremes)")
@click.pass_obj
def scan(
    app: AppContext,
    kind: PolyhedronKind,
    resolution: float,
    qubits: int,
    restarts: Optional[int],
    no_refine: bool,
    out: Optional[Path],
) -> None:
    """Scaled loss over pure states: Bloch grid or extremal search."""
    from commands.scan_cmd import run_extremes, run_scan
    if qubits == 1:
        run_scan(app, kind, resolution, out, refine=not no_refine)
    else:
        run_extremes(app, kind, qubits, restarts, out)


# ── Data ─────────────────────────────────────────────────────

@cli.command()
@click.argument("kind", type=POLYHEDRON)
@click.option("--qubits", type=click.IntRange(min=1), default=1, show_default=True)
@state_options
@click.option("--sample-size", type=float, default=DEFAULT_SAMPLE_SIZE, show_default=True)
@click.option("--expected", is_flag=True, help="Write expected counts instead of a Poisson draw")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--state-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write the true state as JSON")
@click.pass_obj
def simulate(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    state_kind: str,
    weight: Optional[float],
    state_seed: Optional[int],
    sample_size: float,
    expected: bool,
    out: Optional[Path],
    state_out: Optional[Path],
) -> None:
    """Simulate a count record for a named state."""
    from commands.fit_cmd import run_simulate
    spec = _state(state_kind, weight, state_seed)
    run_simulate(app, kind, qubits, spec, sample_size, out, state_out, expected)


@cli.command()
@click.argument("kind", type=POLYHEDRON)
@click.argument("counts", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--qubits", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--rank", type=click.IntRange(min=1), default=None,
              help="Fixed rank; omitted selects the smallest adequate rank")
@click.option("--alpha", type=float, default=None, help="Significance level of rank selection")
@click.option("--truth", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="True state JSON for a fidelity report")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@PROTOCOL_FILE
@click.pass_obj
def reconstruct(
    app: AppContext,
    kind: PolyhedronKind,
    counts: Path,
    qubits: int,
    rank: Optional[int],
    alpha: Optional[float],
    truth: Optional[Path],
    out: Optional[Path],
    protocol_file: Optional[Path],
) -> None:
    """Maximum-likelihood reconstruction from a count record."""
    from commands.fit_cmd import run_reconstruct
    run_reconstruct(app, kind, qubits, counts, rank, alpha, truth, out, protocol_file)


@cli.command()
@click.argument("kind", type=POLYHEDRON)
@click.argument("counts", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--qubits", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--rank", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
@PROTOCOL_FILE
@click.pass_obj
def adequacy(
    app: AppContext,
    kind: PolyhedronKind,
    counts: Path,
    qubits: int,
    rank: int,
    alpha: float,
    protocol_file: Optional[Path],
) -> None:
    """Chi-squared test of a rank-r fit against a count record."""
    from commands.fit_cmd import run_adequacy
    run_adequacy(app, kind, qubits, counts, rank, alpha, protocol_file)


# ── Loss distribution ────────────────────────────────────────

@cli.command()
@click.argument("kind", type=POLYHEDRON)
@click.option("--qubits", type=click.IntRange(min=1), default=1, show_default=True)
@state_options
@click.option("--rank", type=click.IntRange(min=1), default=None,
              help="Model rank [default: rank of the state]")
@click.option("--sample-size", type=float, default=DEFAULT_SAMPLE_SIZE, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_obj
def losscoef(
    app: AppContext,
    kind: PolyhedronKind,
    qubits: int,
    state_kind: str,
    weight: Optional[float],
    state_seed: Optional[int],
    rank: Optional[int],
    sample_size: float,
    out: Optional[Path],
) -> None:
    """Coefficients and moments of the fidelity-loss distribution."""
    from commands.distribution_cmd import run_losscoef
    spec = _state(state_kind, weight, state_seed)
    run_losscoef(app, kind, qubits, spec, sample_size, rank, out)


@cli.command()
@click.argument("config", required=False)
@click.option("--runs", type=click.IntRange(min=1), default=None)
@click.option("--sample-size", type=float, default=None)
@click.option("--qubits", type=click.IntRange(min=1), default=None)
@click.option("--theory-only", is_flag=True, help="Only sample the theoretical distribution")
@click.option("--list", "list_configs", is_flag=True, help="List bundled experiment configs")
@click.pass_obj
def mc(
    app: AppContext,
    config: Optional[str],
    runs: Optional[int],
    sample_size: Optional[float],
    qubits: Optional[int],
    theory_only: bool,
    list_configs: bool,
) -> None:
    """Monte Carlo experiment from a JSON config (bundled name or path)."""
    from commands.distribution_cmd import run_mc
    from utils.data_loader import DataLoader

    if list_configs or config is None:
        for name in DataLoader().list_experiments():
            click.echo(name)
        return
    overrides = {
        "runs": runs,
        "sample_size": sample_size,
        "qubits": qubits,
        "theory_only": True if theory_only else None,
    }
    run_mc(app, config, overrides)


# ── Entry Point ──────────────────────────────────────────────

def handle_sigint(sig: int, frame: Optional[FrameType]) -> None:
    """Handle Ctrl+C gracefully."""
    console.print("\n  Interrupted.\n")
    sys.exit(130)


def main() -> None:
    signal.signal(signal.SIGINT, handle_sigint)
    cli()


if __name__ == "__main__":
    main()

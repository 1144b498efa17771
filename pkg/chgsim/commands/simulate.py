"""simulate: validators, then the time stepper with streamed output."""

from pathlib import Path
from typing import Optional, Union

from chgsim.core.exceptions import HypothesisViolation
from chgsim.core.logger import logger
from chgsim.models import RunConfig
from chgsim.services.coefficients.validators import validate_coefficients
from chgsim.services.run_setup import build_run, make_simulation
from chgsim.storage import DiagnosticsWriter, ReportWriter, SnapshotWriter


def cmd_simulate(
    config: RunConfig,
    out_dir: Union[str, Path],
    seed: Optional[int] = None,
    snapshot_every: Optional[int] = None,
) -> int:
    """
    Run one trajectory.

    Writes diagnostics.csv every step, snapshots at the configured cadence,
    equilibrium.json on steady detection and run_summary.json at the end.

    Returns:
        0 on clean completion (validator and solver failures raise)
    """
    if snapshot_every is not None:
        output = config.output.model_copy(update={"snapshot_every": snapshot_every})
        config = config.model_copy(update={"output": output})

    setup = build_run(config, seed)
    reports = ReportWriter(out_dir)

    coefficient_report = validate_coefficients(setup.coeffs, setup.grid, setup.psi0)
    if coefficient_report.epsilon <= 0.0:
        reports.report_rows("epsilon_report.csv", coefficient_report.rows)
        raise HypothesisViolation(coefficient_report.epsilon, coefficient_report.epsilon_location)

    snapshots = SnapshotWriter(out_dir)
    on_snapshot = snapshots.write if config.output.snapshot_every > 0 else None
    with DiagnosticsWriter(out_dir) as diagnostics:
        simulation = make_simulation(setup, on_record=diagnostics.write, on_snapshot=on_snapshot)
        result = simulation.run(setup.psi0)

    if result.steady:
        reports.json("equilibrium.json", result.equilibrium)
    summary = {
        "steps": result.state.step,
        "t": result.state.t,
        "steady": result.steady,
        "steady_step": result.equilibrium.step if result.steady else None,
        "epsilon": setup.coeffs.epsilon,
        "mean_shift": setup.mean_shift,
        "snapshots": snapshots.written,
        **{key: value for key, value in result.stats.items() if key != "steps"},
    }
    reports.json("run_summary.json", summary)

    logger.info("Simulate command finished", out_dir=str(out_dir), **summary)
    print(f"steps={summary['steps']} t={summary['t']:.6g} steady={summary['steady']}"
          f" energy={result.last_record.energy:.17g}")
    return 0

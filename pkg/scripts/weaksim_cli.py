#!/usr/bin/env python3
"""
weaksim command-line interface
Weak values, presence verdicts, Monte Carlo pointer simulations and
weak-limit convergence sweeps for pre- and postselected scenarios.

Exit codes: 0 success, 2 invalid input, 3 statistical/runtime failure.
"""

import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence, Tuple

import click

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src import __version__
from src.config_manager import ConfigManager
from src.weaksim import service
from src.weaksim.config import DEFAULT_G, DEFAULT_SIGMA, MIN_TRIALS
from src.weaksim.errors import WeakSimError
from src.weaksim.meter import GaussianMeter
from src.weaksim.models import Report
from src.weaksim.persistence import ScenarioBundle, builtin_bundle, load_scenario_document, save_report
from src.weaksim.utils import set_verbose

EXIT_INVALID = 2
EXIT_RUNTIME = 3


def _fail(message: str, code: int) -> None:
    click.echo(f"❌ {message}", err=True)
    sys.exit(code)


@contextmanager
def _exit_codes():
    """Map toolkit errors onto the CLI exit codes"""
    try:
        yield
    except (ValueError, KeyError, IndexError) as e:
        _fail(str(e).strip("'\""), EXIT_INVALID)
    except (WeakSimError, RuntimeError) as e:
        _fail(str(e), EXIT_RUNTIME)


def _load_bundle(
    scenario_path: Optional[str], builtin: Optional[str], attach: Sequence[str], g: float, sigma: float
) -> ScenarioBundle:
    if scenario_path and builtin:
        raise ValueError("give either a scenario document or --builtin, not both")
    if not scenario_path and not builtin:
        raise ValueError("no scenario: pass a document path or --builtin three-box")
    bundle = load_scenario_document(scenario_path) if scenario_path else builtin_bundle(builtin)
    if attach:
        meters = list(bundle.scenario.window.meter_events)
        meters += [GaussianMeter.for_projector(bundle.projector(spec), g, sigma, spec) for spec in attach]
        bundle = bundle.with_meters(meters)
    return bundle


def _emit(report: Report, fmt: str, out: Optional[str]) -> None:
    if fmt == "machine":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        text = report.to_text()
    if out:
        path = save_report(text, out)
        click.echo(f"💾 Report saved to: {path}", err=True)
    else:
        click.echo(text, nl=False)


def _parse_g_list(raw: str) -> Tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"not a comma-separated list of numbers: {raw!r}", param_hint="--g-list")


def scenario_options(fn):
    """Options shared by every command that loads a scenario"""
    options = [
        click.argument("scenario_path", required=False, type=click.Path(dir_okay=False)),
        click.option("--builtin", "-b", default=None, help="Built-in scenario name (three-box)"),
        click.option("--attach", multiple=True, help="Attach a meter on a projector spec such as A or A+C (repeatable)"),
        click.option("--g", "g", type=float, default=DEFAULT_G, show_default=True, help="Strength for --attach meters"),
        click.option("--sigma", type=float, default=DEFAULT_SIGMA, show_default=True, help="Pointer width for --attach meters"),
        click.option("--format", "fmt", type=click.Choice(["text", "machine"]), default="text", show_default=True),
        click.option("--out", "-o", default=None, help="Write the report to PATH instead of stdout"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Tagged progress logging on stderr")
@click.pass_context
def cli(ctx, verbose):
    """Weak measurement toolkit: weak values, verdicts, simulations and sweeps."""
    ctx.ensure_object(dict)
    ctx.obj['config'] = ConfigManager()
    set_verbose(verbose or ctx.obj['config'].is_verbose())


@cli.command()
@scenario_options
@click.option("--pair", nargs=2, default=None, help="Two orthogonal projector specs, e.g. --pair A C")
@click.option("--zero-tol", type=float, default=None, help="Presence threshold on |weak value| (defaults to config)")
@click.pass_context
def analyze(ctx, scenario_path, builtin, attach, g, sigma, fmt, out, pair, zero_tol):
    """Weak values, channel amplitudes, presence verdicts and the additivity check."""
    config = ctx.obj['config']
    with _exit_codes():
        bundle = _load_bundle(scenario_path, builtin, attach, g, sigma)
        report = service.analyze(bundle, tuple(pair) if pair else None, zero_tol if zero_tol is not None else config.get_zero_tol())
    _emit(report, fmt, out)


@cli.command()
@scenario_options
@click.option("--trials", "-n", type=int, default=None, help=f"Number of trials, at least {MIN_TRIALS}")
@click.option("--seed", "-s", type=int, default=None, help="Master seed")
@click.option("--workers", "-w", type=int, default=None, help="Worker threads (results do not depend on this)")
@click.option("--zero-test-k", type=float, default=None, help="Standard errors for the statistical zero test")
@click.pass_context
def simulate(ctx, scenario_path, builtin, attach, g, sigma, fmt, out, trials, seed, workers, zero_test_k):
    """Monte Carlo pointer readings with postselection."""
    config = ctx.obj['config']
    trials = trials if trials is not None else config.get_trials()
    if trials < MIN_TRIALS:
        _fail(f"--trials must be at least {MIN_TRIALS}, got {trials}", EXIT_INVALID)
    with _exit_codes():
        bundle = _load_bundle(scenario_path, builtin, attach, g, sigma)
        report = service.simulate(
            bundle,
            trials=trials,
            seed=seed if seed is not None else config.get_seed(),
            workers=max(1, workers) if workers is not None else config.get_workers(),
            zero_test_k=zero_test_k if zero_test_k is not None else config.get_zero_test_k(),
        )
    _emit(report, fmt, out)


@cli.command()
@scenario_options
@click.option("--meter", "-m", default=None, help="Meter label (optional when there is one meter)")
@click.option("--g-list", default="0.2,0.1,0.05,0.025", show_default=True, help="Strictly decreasing strengths")
@click.option("--mode", type=click.Choice(["exact", "sampled"]), default="exact", show_default=True)
@click.option("--trials", "-n", type=int, default=None, help="Trials per strength in sampled mode")
@click.option("--seed", "-s", type=int, default=None, help="Master seed for sampled mode")
@click.option("--workers", "-w", type=int, default=None, help="Worker threads for sampled mode")
@click.pass_context
def sweep(ctx, scenario_path, builtin, attach, g, sigma, fmt, out, meter, g_list, mode, trials, seed, workers):
    """<Q>/g along decreasing strengths, extrapolated to g -> 0."""
    config = ctx.obj['config']
    trials = trials if trials is not None else config.get_trials()
    if mode == "sampled" and trials < MIN_TRIALS:
        _fail(f"--trials must be at least {MIN_TRIALS}, got {trials}", EXIT_INVALID)
    strengths = _parse_g_list(g_list)
    with _exit_codes():
        bundle = _load_bundle(scenario_path, builtin, attach, g, sigma)
        report = service.sweep(
            bundle,
            meter,
            strengths,
            mode=mode,
            seed=seed if seed is not None else config.get_seed(),
            trials=trials,
            workers=max(1, workers) if workers is not None else config.get_workers(),
        )
    _emit(report, fmt, out)


@cli.command()
@scenario_options
@click.option("--trials", "-n", type=int, default=None, help=f"Number of trials, at least {MIN_TRIALS}")
@click.option("--seed", "-s", type=int, default=None, help="Master seed")
@click.pass_context
def strong(ctx, scenario_path, builtin, attach, g, sigma, fmt, out, trials, seed):
    """Strong measurement in the channel basis, then postselection."""
    config = ctx.obj['config']
    trials = trials if trials is not None else config.get_trials()
    if trials < MIN_TRIALS:
        _fail(f"--trials must be at least {MIN_TRIALS}, got {trials}", EXIT_INVALID)
    with _exit_codes():
        bundle = _load_bundle(scenario_path, builtin, attach, g, sigma)
        report = service.strong(bundle, trials=trials, seed=seed if seed is not None else config.get_seed())
    _emit(report, fmt, out)


@cli.command()
@click.option("--zero-tol", type=float, default=None, help="Default presence threshold")
@click.option("--zero-test-k", type=float, default=None, help="Default statistical zero-test width")
@click.option("--seed", type=int, default=None, help="Default master seed")
@click.option("--trials", type=int, default=None, help="Default trial count")
@click.option("--workers", type=int, default=None, help="Default worker threads")
@click.option("--verbose/--quiet", "verbose", default=None, help="Default logging verbosity")
@click.option("--global", "is_global", is_flag=True, help="Save to global config")
@click.pass_context
def config(ctx, zero_tol, zero_test_k, seed, trials, workers, verbose, is_global):
    """Save run defaults, or show every config source when no option is given."""
    config_manager = ctx.obj['config']
    config_data = {
        key: value
        for key, value in (
            ("zero_tol", zero_tol),
            ("zero_test_k", zero_test_k),
            ("seed", seed),
            ("trials", trials),
            ("workers", workers),
            ("verbose", verbose),
        )
        if value is not None
    }

    if not config_data:
        click.echo(json.dumps(config_manager.load_all_configs(), indent=2))
        return

    config_path = config_manager.config_paths[-1] if is_global else config_manager.config_paths[0]
    config_manager.save_config(config_data, config_path)

    click.echo("✅ Configuration saved!")
    for key, value in config_data.items():
        click.echo(f"   {key}: {value}")
    click.echo(f"💾 Saved to: {config_path}")


@cli.command()
@click.pass_context
def version(ctx):
    """Show version information."""
    click.echo(f"weaksim v{__version__}")
    click.echo("Python " + sys.version.split()[0])
    click.echo(f"Project root: {PROJECT_ROOT}")


if __name__ == '__main__':
    cli()

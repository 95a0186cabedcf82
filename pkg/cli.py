"""Command-line surface: stabverify {validate,test,protocol,hstab,params,sweep,history}.

Exit codes: 0 success, 1 validation failure, 2 I/O, format or usage error.
"""
import functools
import json
import logging
import os
from pathlib import Path

import click

import config
from densesim import parse_observable, parse_state_spec
from errors import DenseCapExceeded, FormatError, StabVerifyError, ValidationError, ZeroOverlap
from utils import canonical_json, canonicalize, make_rng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

SWEEPS = ("identity", "gentle", "closeness", "soundness", "equalize")


def _configure_logging(verbose):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, os.environ.get("STABVERIFY_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def common_options(command):
    """--seed, --out, --dense-cap, --db and -v on every command"""

    @click.option("--seed", type=int, default=None, help="Root seed (default STABVERIFY_SEED or 20160301).")
    @click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")
    @click.option("--dense-cap", type=click.IntRange(min=1), default=None, help="Largest qubit count for dense matrices.")
    @click.option("--db", "database_url", default=None, help="SQLAlchemy URL for run history.")
    @click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug logging.")
    @functools.wraps(command)
    def wrapper(*args, seed, out, dense_cap, database_url, verbose, **kwargs):
        _configure_logging(verbose)
        config.reset()
        pure_cap = None if dense_cap is None else max(dense_cap, config.settings.pure_cap)
        config.configure(seed=seed, out=out, mixed_cap=dense_cap, pure_cap=pure_cap, database_url=database_url)
        return command(*args, **kwargs)

    return wrapper


def _emit(text):
    out = config.settings.out
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _record(command, exit_code, report):
    url = config.settings.database_url
    if not url:
        return
    from models import init_db, record_run

    try:
        record_run(init_db(url), command, config.settings.seed, config.VERSION, exit_code, canonicalize(report))
    except Exception as e:
        logger.warning(f"Could not record run history: {str(e)}")


def run_command(command, build_report):
    """
    Build a report, map failures to exit codes, write the report and record it

    Args:
        command (str): subcommand name
        build_report (callable): returns (report dict, exit code)
    """
    try:
        report, exit_code = build_report()
    except FormatError as e:
        logger.exception(f"{command} aborted")
        report, exit_code = {"error": e.to_dict()}, EXIT_IO
    except ValidationError as e:
        logger.exception(f"{command} aborted")
        report, exit_code = {"error": e.to_dict()}, EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as e:
        logger.exception(f"{command} aborted")
        report, exit_code = {"error": {"error": type(e).__name__, "message": str(e)}}, EXIT_IO
    report = {
        "command": command,
        "seed": config.settings.seed,
        "config": config.settings.echo(),
        "version": config.VERSION,
        **report,
    }
    _emit(canonical_json(report))
    _record(command, exit_code, report)
    click.get_current_context().exit(exit_code)


@click.group()
@click.version_option(config.VERSION, prog_name="stabverify")
def cli():
    """Stabilizer test, single-qubit-measurement protocol and h verification at desk scale."""


@cli.command()
@click.argument("stabilizer")
@common_options
def validate(stabilizer):
    """Validate a stabilizer generator file."""
    from pauli import load_stabilizer

    def build():
        group = load_stabilizer(stabilizer)
        return {"valid": True, "stabilizer": group.to_dict()}, EXIT_OK

    run_command("validate", build)


def _closeness_report(rho, group, observable, projector):
    from stabtest import closeness_bounds

    M = parse_observable(observable, group.n)
    p_pass = (1 + projector.overlap(rho)) / 2
    try:
        return closeness_bounds(rho, group, M, max(0.0, 1 - p_pass), projector).to_dict()
    except ZeroOverlap as e:
        return {"skipped": e.to_dict()}


@cli.command()
@click.argument("state")
@click.argument("stabilizer")
@click.option("--rounds", type=click.IntRange(min=0), default=None, help="Sampled test rounds.")
@click.option("--observable", default="identity", show_default=True, help="POVM element for the closeness sandwich.")
@common_options
def test(state, stabilizer, rounds, observable):
    """Run the stabilizer test on STATE against STABILIZER."""
    from pauli import load_stabilizer
    from stabtest import gentle_measurement_check, lambda_projector, pass_probability_identity_check, run_stabilizer_test

    def build():
        group = load_stabilizer(stabilizer)
        rho = parse_state_spec(state, group.n)
        count = config.settings.rounds if rounds is None else rounds
        report = {
            "stabilizer": group.to_dict(),
            "test": run_stabilizer_test(rho, group, count, make_rng(config.settings.seed)).to_dict(),
        }
        try:
            projector = lambda_projector(group)
        except DenseCapExceeded as e:
            # pure states up to the pure cap still get the sampled and enumerated test
            logger.warning(f"Skipping the Lambda checks: {e}")
            skipped = {"skipped": e.to_dict()}
            report.update(identity=skipped, gentle=skipped, closeness=skipped)
            return report, EXIT_OK
        report.update(
            identity=pass_probability_identity_check(rho, group, projector)._asdict(),
            gentle=gentle_measurement_check(rho, group, projector)._asdict(),
            closeness=_closeness_report(rho, group, observable, projector),
        )
        return report, EXIT_OK

    run_command("test", build)


def _build_strategy(spec, instance, params, mode):
    from merlin import get_strategy

    try:
        return get_strategy(spec, instance, params=params, mode=mode)
    except StabVerifyError:
        raise
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--strategy") from e


@cli.command()
@click.argument("instance_file")
@click.option("--mode", type=click.Choice(["direct", "mbqc"]), default="direct", show_default=True)
@click.option("--strategy", default=None, help="honest | depolarizing:MU | fixed:STATE | optimal (default from the instance).")
@click.option("--rounds", type=click.IntRange(min=0), default=None, help="Monte Carlo rounds.")
@click.option("--epsilon", type=float, default=None, help="Override the test-failure budget.")
@common_options
def protocol(instance_file, mode, strategy, rounds, epsilon):
    """Simulate the protocol on an instance file."""
    import protocol as qam

    def build():
        tol = config.settings.tol_valid
        instance = qam.load_instance(instance_file)
        if epsilon is not None:
            instance.epsilon = epsilon
        params = instance.params()
        merlin = _build_strategy(strategy or instance.strategy, instance, params, mode)
        breakdown = qam.soundness_breakdown(params, instance, merlin, mode)
        p_circuit = qam.qam_acceptance(instance.circuit, instance.witness_for)
        honest = qam.honest_acceptance(params, instance)
        count = config.settings.rounds if rounds is None else rounds
        simulation = qam.simulate_protocol(params, instance, merlin, mode, count, make_rng(config.settings.seed))
        deviation = qam.subset_average_deviation(instance)
        monte_carlo = simulation.to_dict()
        monte_carlo["expected"] = breakdown.p_acc
        if simulation.stderr:
            monte_carlo["z_score"] = (simulation.rate - breakdown.p_acc) / simulation.stderr
        report = {
            "instance": instance.to_dict(),
            "mode": mode,
            "strategy": merlin.to_dict(),
            "params": params.to_dict(),
            "test_branch_identity": {"lhs": deviation, "rhs": tol, "holds": deviation <= tol},
            "breakdown": breakdown.to_dict(),
            "honest": {
                "p_circuit": p_circuit,
                "exact": honest,
                "completeness": {"lhs": params.alpha, "rhs": honest, "holds": p_circuit < params.a or honest >= params.alpha - tol},
            },
            "soundness": {"lhs": breakdown.optimal_p_acc, "rhs": breakdown.beta_exact, "holds": breakdown.optimal_p_acc <= breakdown.beta_exact + tol},
            "monte_carlo": monte_carlo,
        }
        return report, EXIT_OK

    run_command("protocol", build)


@cli.command()
@click.argument("instance_file")
@click.option("--samples", type=click.IntRange(min=1), default=10000, show_default=True, help="Codespace samples for the oracle.")
@click.option("--rounds", type=click.IntRange(min=0), default=None, help="Verifier rounds against the best prover.")
@common_options
def hstab(instance_file, samples, rounds):
    """Compute h for an instance file and run its verifier."""
    import hstab as h

    def build():
        inst = h.load_hstab_instance(instance_file)
        rng = make_rng(config.settings.seed)
        value = h.h_stab(inst)
        sampled = h.h_stab_sampling_oracle(inst, samples, rng)
        params = h.qma_params(inst.a, inst.b)
        prover = h.best_codespace_state(inst)
        count = config.settings.rounds if rounds is None else rounds
        report = {
            "instance": inst.to_dict(),
            "h_stab": value,
            "sampling_oracle": {"lhs": sampled, "rhs": value, "holds": sampled <= value + config.settings.tol_valid},
            "classification": "yes" if value >= inst.a else "no" if value <= inst.b else "outside promise",
            "params": params.to_dict(),
            "verifier": h.qma_verify(inst, prover, params, count, rng).to_dict(),
        }
        if value <= inst.b:
            report["soundness"] = h.qma_soundness_check(inst, params).to_dict()
        return report, EXIT_OK

    run_command("hstab", build)


@cli.command()
@click.option("--x-size", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--a", "a", type=float, default=2 / 3, show_default=True)
@click.option("--b", "b", type=float, default=1 / 3, show_default=True)
@click.option("--qma", is_flag=True, help="Schedule for verifying h instead of the protocol.")
@click.option("--epsilon", type=float, default=None, help="Override epsilon (protocol schedule only).")
@common_options
def params(x_size, a, b, qma, epsilon):
    """Print a parameter schedule."""

    def build():
        if qma:
            from hstab import qma_params

            return {"qma": qma_params(a, b).to_dict()}, EXIT_OK
        from protocol import make_params

        return {"protocol": make_params(x_size, a, b, epsilon).to_dict()}, EXIT_OK

    run_command("params", build)


@cli.command()
@click.argument("name", type=click.Choice(SWEEPS + ("all",)), default="all")
@click.option("--cases", type=click.IntRange(min=1), default=None, help="Cases per sweep (default from config).")
@click.option("--n-max", type=click.IntRange(min=1, max=6), default=None, help="Largest qubit count drawn.")
@common_options
def sweep(name, cases, n_max):
    """Randomized inequality and identity sweeps."""
    import hstab as h
    import stabtest as st

    def build():
        count = config.settings.sweep_cases if cases is None else cases
        seed = config.settings.seed
        runners = {
            "identity": lambda: st.identity_sweep(count, seed, n_max or 5),
            "gentle": lambda: st.gentle_sweep(count, seed, n_max or 5),
            "closeness": lambda: st.closeness_sweep(count, seed, n_max or 5),
            "soundness": lambda: h.soundness_sweep(count, seed, n_max or 4),
            "equalize": lambda: h.equalizing_sweep(count, seed),
        }
        chosen = SWEEPS if name == "all" else (name,)
        results = {key: runners[key]().to_dict() for key in chosen}
        violations = sum(r["violations"] for r in results.values())
        return {"sweeps": results, "violations": violations}, EXIT_VALIDATION if violations else EXIT_OK

    run_command("sweep", build)


@cli.command()
@click.option("--limit", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--command", "command_name", default=None, help="Only runs of this command.")
@click.option("--db", "database_url", default=None, help="SQLAlchemy URL (default STABVERIFY_DATABASE_URL).")
def history(limit, command_name, database_url):
    """List recorded runs."""
    from models import init_db, list_runs

    url = database_url or config.settings.database_url
    if not url:
        raise click.UsageError("No history database: pass --db or set STABVERIFY_DATABASE_URL")
    click.echo(canonical_json({"runs": list_runs(init_db(url), limit, command_name)}), nl=False)


def main():
    cli(prog_name="stabverify")

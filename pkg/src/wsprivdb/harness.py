"""Scenario execution and experiment loops behind the CLI."""

from __future__ import annotations

from random import Random

from .hashing import mix64
from .protocols import (
    RUN_CSV_COLUMNS,
    DbServer,
    FilterConfig,
    ProtocolRun,
    SensingOracle,
    build_filter,
    run_lpdb,
    run_lpdb_leakage,
    run_lpdbqs,
)
from .scenario import Scenario
from .spectrum import DeviceCharacteristics, GridSpec, generate_ground_truth


def trial_seeds(seed: int, trial: int) -> dict[str, int]:
    """Per-trial substream seeds, independent of the protocol under test."""
    base = mix64(seed ^ mix64(trial + 1))
    return {
        "cell": mix64(base ^ 1),
        "sensing": mix64(base ^ 2),
        "key": mix64(base ^ 3),
    }


def run_scenario(scenario: Scenario) -> tuple[tuple[str, ...], list[list]]:
    """Execute `trials` independent protocol runs; returns (header, rows)."""
    runs = run_scenario_detailed(scenario)
    return RUN_CSV_COLUMNS, [r.stats.csv_row() for r in runs]


def run_scenario_detailed(scenario: Scenario) -> list[ProtocolRun]:
    s = scenario
    grid = GridSpec(side=s.side, n_ch=s.n_ch)
    db = generate_ground_truth(grid, s.rho, s.seed)
    config = FilterConfig(epsilon=s.epsilon, beta=s.beta, alpha=s.alpha)
    server = DbServer(db, config, seed=mix64(s.seed ^ 0xD6))
    device = DeviceCharacteristics(freq_range=(0, s.n_ch - 1))

    runs = []
    for trial in range(s.trials):
        seeds = trial_seeds(s.seed, trial)
        cell_rng = Random(seeds["cell"])
        cell = (cell_rng.randrange(s.side), cell_rng.randrange(s.side))
        sensing = SensingOracle(db, s.sensing_accuracy, seeds["sensing"])
        if s.protocol == "lpdb":
            run = run_lpdb(db, cell, device, 0, config, sensing, server=server)
        elif s.protocol == "lpdb-leak":
            run = run_lpdb_leakage(db, cell, device, 0, s.leakage, config, sensing,
                                   server=server)
        else:
            run = run_lpdbqs(db, cell, device, 0, Random(seeds["key"]), config,
                             sensing, server=server)
        runs.append(run)
    return runs


FPRATE_COLUMNS = ("target_eps", "observed_fp_rate", "bits_per_item_actual")


def fprate_experiment(
    epsilon_list: list[float],
    beta: int,
    alpha: float,
    n_members: int,
    n_probes: int,
    seed: int,
) -> list[list]:
    """Observed false-positive rate per target epsilon, with an exact
    member-set oracle separating true non-members."""
    if n_probes < 1:
        raise ValueError("n_probes must be >= 1")
    for eps in epsilon_list:
        if not 0.0 < eps < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {eps}")
        if n_probes < 10.0 / eps:
            raise ValueError(
                f"statistical power guard: epsilon={eps} needs at least "
                f"{int(10.0 / eps)} probes, got {n_probes}"
            )
    rows = []
    for i, eps in enumerate(epsilon_list):
        rng = Random(mix64(seed ^ mix64(i + 1)))
        members = set()
        while len(members) < n_members:
            members.add(rng.randbytes(24))
        filt, _ = build_filter(
            sorted(members), FilterConfig(epsilon=eps, beta=beta, alpha=alpha),
            seed=mix64(seed ^ 0xF1 ^ i),
        )
        false_positives = 0
        tested = 0
        while tested < n_probes:
            x = rng.randbytes(24)
            if x in members:
                continue
            tested += 1
            false_positives += filt.lookup(x)
        payload_bits = (filt.serialized_len() - 32) * 8
        rows.append([
            repr(eps),
            repr(false_positives / n_probes),
            repr(payload_bits / n_members),
        ])
    return rows

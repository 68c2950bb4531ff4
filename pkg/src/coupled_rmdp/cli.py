"""Command-line front end.

Exit status: 0 success, 1 invalid input, 2 solver did not converge,
3 instance too large for an exhaustive routine.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import adaptive, budget as budget_mod, horizon, inventory, nonadaptive
from .errors import ConvergenceError, SizeCapError, UnsupportedInputError, ValidationError
from .model import MarkovPolicy
from .modelfile import parse_model, read_csv, save_model, write_csv

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_SIZE = 0, 1, 2, 3


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValidationError, UnsupportedInputError, ConvergenceError, SizeCapError, OSError, ValueError) as exc:
        raise StageError(name, exc) from exc


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    return _stage("parse", parse_model, args.model)


def _discrete_budget(args, spec):
    if args.D is not None:
        return args.D
    if spec.kind != "discrete":
        raise StageError("parse", ValidationError("model budget is not discrete; pass --D"))
    return int(spec.D)


def _budget_spec(args, spec, kind):
    D = spec.D if args.D is None else args.D
    beta = spec.beta if args.beta is None else args.beta
    nb = spec.budget_grid_points if args.budget_grid is None else args.budget_grid
    nm = spec.magnitude_grid_points if getattr(args, "magnitude_grid", None) is None else args.magnitude_grid
    return horizon.BudgetSpec(kind, D, beta, nb, nm)


def cmd_validate(args):
    _load(args)
    print("OK")


def cmd_solve_adaptive(args):
    model, usets, spec = _load(args)
    D = _discrete_budget(args, spec)
    sol = _stage("solve", adaptive.solve_adaptive_finite, model, usets, D)
    out = _out_dir(args)
    T, S, Dc1 = sol.values.shape[0] - 1, model.num_states, sol.values.shape[2]
    write_csv(out / "values.csv", ["t", "s", "d", "value"],
              ((t, s, d, sol.values[t, s, d]) for t in range(T + 1) for s in range(S) for d in range(Dc1)))
    write_csv(out / "policy.csv", ["t", "s", "d", "action"],
              ((t, s, d, sol.policy.actions[t, s, d]) for t in range(T) for s in range(S) for d in range(Dc1)))
    dev, vert = sol.nature
    write_csv(out / "nature.csv", ["t", "s", "d", "a", "deviate", "vertex"],
              ((t, s, d, a, dev[t, s, d, a], vert[t, s, d, a])
               for t in range(T) for s in range(S) for d in range(Dc1) for a in range(model.num_actions)))
    print(f"value {sol.value(model.initial_dist)!r}")


def _write_budgeted(args, model, vf):
    out = _out_dir(args)
    S = model.num_states
    write_csv(out / "values.csv", ["s", "budget", "value"],
              ((s, b, vf.values[s, i]) for s in range(S) for i, b in enumerate(vf.grid)))
    write_csv(out / "policy.csv", ["s", "budget", "action"],
              ((s, b, vf.actions[s, i]) for s in range(S) for i, b in enumerate(vf.grid)))
    print(f"value {vf.value(model.initial_dist)!r}")


def cmd_solve_infinite_a(args):
    model, usets, spec = _load(args)
    D = _discrete_budget(args, spec)
    vf = _stage("solve", horizon.solve_setup_a, model, usets, D, tol=args.tol)
    _write_budgeted(args, model, vf)


def cmd_solve_infinite_b(args):
    model, usets, spec = _load(args)
    b = _budget_spec(args, spec, "discounted")
    vf = _stage("solve", horizon.solve_setup_b, model, usets, b, tol=args.tol)
    _write_budgeted(args, model, vf)


def cmd_solve_continuous(args):
    model, usets, spec = _load(args)
    b = _budget_spec(args, spec, "continuous")
    T = args.horizon if args.horizon is not None else None
    vf = _stage("solve", horizon.solve_continuous, model, usets, b, tol=args.tol, horizon=T)
    _write_budgeted(args, model, vf)


def cmd_solve_nonadaptive_reward(args):
    model, usets, spec = _load(args)
    D = _discrete_budget(args, spec)
    sol = _stage("solve", nonadaptive.solve_nonadaptive_reward_only, model, usets, D, tol=args.tol,
                 max_cuts=args.max_cuts)
    out = _out_dir(args)
    rho = sol.occupancy.rho
    write_csv(out / "occupancy.csv", ["t", "s", "a", "rho"],
              ((t, s, a, rho[t, s, a]) for t, s, a in np.ndindex(rho.shape)))
    write_csv(out / "summary.csv", ["value", "gap", "cuts"], [(sol.value, sol.gap, sol.cuts)])
    print(f"value {sol.value!r}")


def cmd_budget_bound(args):
    rates = _stage("parse", budget_mod.DeviationRates, _floats(args.alphas), args.delta)
    bound = budget_mod.budget_bound(rates)
    print(f"D' = {bound:.3f}")
    print(f"ceiling = {math.ceil(bound)}")


def cmd_bench_inventory(args):
    params = _stage("parse", inventory.InventoryParams, T=args.T, max_stock=args.max_stock)
    if args.emit_model:
        model, usets = inventory.build_inventory_mdp(params)
        save_model(args.emit_model, model, usets, horizon.BudgetSpec("discrete", 0))
    if args.out is None:
        return
    rows = _stage("simulate", inventory.figure3_experiment, params, _floats(args.p_rush), _ints(args.d0),
                  args.trajectories, args.seed)
    out = _out_dir(args)
    write_csv(out / "figure3.csv", ["d0", "p_rush", "mean", "stderr", "n"],
              ((r.d0 if r.policy == "budgeted" else "aware", r.p_rush, r.mean, r.stderr, r.n) for r in rows))


def load_policy_csv(path, model):
    """Read a policy written by ``solve-adaptive`` (t,s,d,action) or a Markov table (t,s,action)."""
    header, rows = read_csv(path)
    T, S, A = model.horizon, model.num_states, model.num_actions
    data = np.array(rows, dtype=int)
    if header == ["t", "s", "d", "action"]:
        Dm = int(data[:, 2].max())
        table = np.zeros((T, S, Dm + 1), dtype=int)
        table[data[:, 0], data[:, 1], data[:, 2]] = data[:, 3]
        return adaptive.AdaptivePolicy(table)
    if header == ["t", "s", "action"]:
        table = np.zeros((T, S), dtype=int)
        table[data[:, 0], data[:, 1]] = data[:, 2]
        return MarkovPolicy.from_actions(table, A)
    raise ValidationError(f"{path}: unrecognized policy header {header}")


def cmd_simulate(args):
    model, usets, _ = _load(args)
    if model.horizon is None:
        raise StageError("parse", UnsupportedInputError("simulate needs a finite-horizon model"))
    policy = _stage("parse", load_policy_csv, args.policy, model)
    mean, stderr = _stage("simulate", adaptive.simulate_model, model, usets, policy, args.p_rush, args.d0,
                          args.trajectories, args.seed)
    print(f"mean {mean!r}")
    print(f"stderr {stderr!r}")
    if args.out:
        out = _out_dir(args)
        write_csv(out / "simulation.csv", ["d0", "p_rush", "mean", "stderr", "n"],
                  [(args.d0, args.p_rush, mean, stderr, args.trajectories)])


def build_parser():
    parser = argparse.ArgumentParser(prog="coupled-rmdp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, model=True):
        p = sub.add_parser(name, help=help_text)
        if model:
            p.add_argument("--model", required=True, help="JSON model file")
        p.set_defaults(func=fn)
        return p

    add("validate", cmd_validate, "check a model file")

    p = add("solve-adaptive", cmd_solve_adaptive, "finite-horizon adaptive budgeted game")
    p.add_argument("--D", type=int)
    p.add_argument("--out", required=True)

    p = add("solve-infinite-a", cmd_solve_infinite_a, "infinite horizon, undiscounted deviation count")
    p.add_argument("--D", type=int)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", required=True)

    for name, fn, text in (("solve-infinite-b", cmd_solve_infinite_b, "infinite horizon, discounted deviations"),
                           ("solve-continuous", cmd_solve_continuous, "fractional deviations")):
        p = add(name, fn, text)
        p.add_argument("--D", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--budget-grid", type=int)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--out", required=True)
    p.add_argument("--magnitude-grid", type=int)
    p.add_argument("--horizon", type=int, help="finite horizon (default: infinite)")

    p = add("solve-nonadaptive-reward", cmd_solve_nonadaptive_reward, "non-adaptive, reward-only uncertainty")
    p.add_argument("--D", type=int)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-cuts", type=int, default=10_000)
    p.add_argument("--out", required=True)

    p = add("budget-bound", cmd_budget_bound, "probabilistic deviation budget", model=False)
    p.add_argument("--alphas", required=True, help="comma-separated deviation probabilities")
    p.add_argument("--delta", type=float, required=True)

    p = add("bench-inventory", cmd_bench_inventory, "inventory benchmark sweep", model=False)
    p.add_argument("--p-rush", default="0.01,0.05,0.1")
    p.add_argument("--d0", default="0,1,5,10,100")
    p.add_argument("--trajectories", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--max-stock", type=int, default=20)
    p.add_argument("--emit-model", help="also write the generated model file here")
    p.add_argument("--out")

    p = add("simulate", cmd_simulate, "Monte Carlo evaluation of a stored policy")
    p.add_argument("--policy", required=True, help="policy.csv from solve-adaptive, or t,s,action table")
    p.add_argument("--p-rush", type=float, required=True, help="per-stage deviation probability")
    p.add_argument("--d0", type=int, default=0)
    p.add_argument("--trajectories", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except StageError as err:
        print(f"error [{err.stage}]: {err.exc}", file=sys.stderr)
        if isinstance(err.exc, ConvergenceError):
            return EXIT_CONVERGENCE
        if isinstance(err.exc, SizeCapError):
            return EXIT_SIZE
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

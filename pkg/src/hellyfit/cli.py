"""Command-line surface: fit, net, demo, bench, and oracle commands.

Exit codes are a stable contract: 0 for success, 1 for a verification or
verdict failure, 2 for usage and input errors.  All outputs are
deterministic given --seed; timings are the one exception and only appear
in bench CSV lines.
"""

import argparse
import io
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from .geometry import DimensionMismatchError, HPolytope, VPolytope
from .jsonio import BodyFormatError, load_body, load_container, read_json
from .lab import SearchFailure, TangentFamily, cap_body, inflation_search, lower_bound_demo
from .nets import build_net_2d, build_net_sufficient, verify_net
from .solver import alpha_reference, beta_brute, beta_direct, beta_msw
from .svg import render_demo_svg, render_fit_svg

OK, VERDICT_FAIL, USAGE_ERROR = 0, 1, 2

_METHODS = {"direct", "msw", "brute"}
_COMMANDS = {"fit", "net", "demo", "bench", "oracle"}


@dataclass
class RunConfig:
    """Checked bundle of everything one command invocation needs."""

    command: str
    epsilon: float = 0.1
    seed: int = 0
    method: str = "msw"
    inputs: tuple = ()
    out: str | None = None
    svg: str | None = None
    with_reflection: bool = False
    n: int = 3
    samples: int | None = None
    sizes: tuple = (1000, 10000)
    reps: int = 3
    fine_eps: float = 0.005

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.command in ("fit", "net") and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie strictly between 0 and 1")
        self.seed = int(self.seed)
        self.sizes = tuple(int(s) for s in self.sizes)
        if any(a >= b for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly ascending")


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _mirror(K):
    flip = np.array([[-1.0, 0.0], [0.0, 1.0]])
    return VPolytope(K.vertices @ flip.T)


def _build_net(K, epsilon):
    if K.dim == 2:
        return build_net_2d(K, epsilon)
    return build_net_sufficient(K, epsilon)


_SOLVERS = {"direct": beta_direct, "msw": beta_msw, "brute": beta_brute}


def cmd_fit(config: RunConfig) -> int:
    body_doc, container_doc = (read_json(p) for p in config.inputs)
    K = load_body(body_doc)
    P = load_container(container_doc)
    if K.dim != P.normals.shape[1]:
        raise BodyFormatError("body and container disagree on dimension")
    if config.svg is not None and K.dim != 2:
        raise BodyFormatError("SVG output needs a planar instance")
    solve = _SOLVERS[config.method]

    def run(body):
        net = _build_net(body, config.epsilon)
        if config.method == "brute":
            return body, net, solve(body, net, P)
        return body, net, solve(body, net, P, seed=config.seed)

    body, net, result = run(K)
    if config.with_reflection:
        m_body, m_net, mirrored = run(_mirror(K))
        if mirrored.beta > result.beta:
            body, net, result = m_body, m_net, mirrored
            result.stats.note = (result.stats.note + "; " if result.stats.note
                                 else "") + "reflected copy wins"
    _emit(json.dumps(result.to_json(), indent=2), config.out)
    if config.svg is not None:
        render_fit_svg(body, P, result, path=config.svg)
    return OK


def cmd_net(config: RunConfig) -> int:
    K = load_body(read_json(config.inputs[0]))
    net = _build_net(K, config.epsilon)
    report = verify_net(net, K, trials=64, seed=config.seed)
    _emit(json.dumps(net.to_json(), indent=2), config.out)
    if not report.ok:
        sys.stderr.write(
            f"net verification failed {report.failures}/{report.trials}"
            f" trials (worst margin {report.worst_margin})\n")
        return VERDICT_FAIL
    return OK


def cmd_demo(config: RunConfig) -> int:
    samples = 4 * config.n if config.samples is None else config.samples
    verdict = lower_bound_demo(config.n, samples, seed=config.seed)
    _emit(json.dumps(verdict, indent=2), config.out)
    if config.svg is not None:
        _demo_picture(config, samples)
    return OK if verdict["verdict"] == "pass" else VERDICT_FAIL


def _demo_picture(config: RunConfig, samples):
    """Redraw one certified inflation exactly as the demo's first subset."""
    root = config.seed % (2 ** 63)
    rng = np.random.default_rng(np.random.SeedSequence([root, 0]))
    K = cap_body(config.n, margin=math.pi / (2 * config.n))
    phase = float(rng.uniform(0.0, 2.0 * math.pi))
    family = TangentFamily.at_angles(
        phase + 2.0 * math.pi * np.arange(samples) / samples)
    subset = tuple(range(config.n))
    sub_seed = np.random.SeedSequence([root, 1, *subset])
    placement = None
    try:
        result = inflation_search(K, family.take(subset),
                                  seed=int(sub_seed.generate_state(1)[0]))
        if not result.capped:
            placement = result.placement
    except SearchFailure:
        pass
    render_demo_svg(K, family, placement, path=config.svg)


def _bench_instance(n, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed % (2 ** 63), n]))
    angles = rng.uniform(0.0, 2.0 * math.pi, size=n)
    normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return HPolytope(normals, np.ones(n))


def cmd_bench(config: RunConfig) -> int:
    K = VPolytope(np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0],
                            [1.0, -1.0]]) * 0.5)
    fallback = 1.0 - 1.0 / math.sqrt(2.0)
    net = _build_net(K, config.epsilon if 0.0 < config.epsilon < 1.0 else fallback)
    solve = _SOLVERS[config.method]
    lines = io.StringIO()
    lines.write("n,method,mean_time_s,lp_calls,violation_tests\n")
    for n in config.sizes:
        P = _bench_instance(n, config.seed)
        times, result = [], None
        for _ in range(max(1, config.reps)):
            t0 = time.perf_counter()
            if config.method == "brute":
                result = solve(K, net, P)
            else:
                result = solve(K, net, P, seed=config.seed)
            times.append(time.perf_counter() - t0)
        lines.write(f"{n},{config.method},{np.mean(times):.6f},"
                    f"{result.stats.lp_calls},{result.stats.violation_tests}\n")
    _emit(lines.getvalue(), config.out)
    return OK


def cmd_oracle(config: RunConfig) -> int:
    body_doc, container_doc = (read_json(p) for p in config.inputs)
    K = load_body(body_doc)
    P = load_container(container_doc)
    if K.dim != P.normals.shape[1]:
        raise BodyFormatError("body and container disagree on dimension")
    alpha = alpha_reference(K, P, config.fine_eps, seed=config.seed)
    if config.with_reflection:
        alpha = max(alpha, alpha_reference(_mirror(K), P, config.fine_eps,
                                           seed=config.seed))
    _emit(json.dumps({"alpha": alpha, "fine_eps": config.fine_eps}), config.out)
    return OK


def _parser():
    top = argparse.ArgumentParser(
        prog="hellyfit",
        description="Largest rotated copies of a convex body inside an "
                    "intersection of half-spaces.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)

    fit = sub.add_parser("fit", help="fit a body into a container")
    fit.add_argument("body")
    fit.add_argument("container")
    fit.add_argument("--epsilon", type=float, default=0.1)
    fit.add_argument("--method", choices=sorted(_METHODS), default="msw")
    fit.add_argument("--svg", default=None)
    fit.add_argument("--with-reflection", action="store_true")
    common(fit)

    net = sub.add_parser("net", help="build and verify a rotation net")
    net.add_argument("body")
    net.add_argument("--epsilon", type=float, default=0.1)
    common(net)

    demo = sub.add_parser("demo", help="run the few-constraints demonstration")
    demo.add_argument("--n", type=int, default=3)
    demo.add_argument("--samples", type=int, default=None)
    demo.add_argument("--svg", default=None)
    common(demo)

    bench = sub.add_parser("bench", help="time the solvers on growing families")
    bench.add_argument("--sizes", default="1000,10000")
    bench.add_argument("--reps", type=int, default=3)
    bench.add_argument("--method", choices=sorted(_METHODS), default="msw")
    # the coarse square net keeps every common size in the sampling regime
    bench.add_argument("--epsilon", type=float, default=1.0 - 1.0 / math.sqrt(2.0))
    common(bench)

    oracle = sub.add_parser("oracle", help="fine-net reference value")
    oracle.add_argument("body")
    oracle.add_argument("container")
    oracle.add_argument("--fine-eps", type=float, default=0.005)
    oracle.add_argument("--with-reflection", action="store_true")
    common(oracle)
    return top


def _config_from(args) -> RunConfig:
    fields = {"command": args.command, "seed": args.seed, "out": args.out}
    if args.command in ("fit", "oracle"):
        fields["inputs"] = (args.body, args.container)
    if args.command == "net":
        fields["inputs"] = (args.body,)
    for name in ("epsilon", "method", "svg", "n", "samples", "reps",
                 "fine_eps"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    if getattr(args, "with_reflection", False):
        fields["with_reflection"] = True
    if hasattr(args, "sizes"):
        try:
            fields["sizes"] = tuple(int(s) for s in str(args.sizes).split(","))
        except ValueError as exc:
            raise ValueError(f"bad --sizes value {args.sizes!r}") from exc
    return RunConfig(**fields)


_RUNNERS = {"fit": cmd_fit, "net": cmd_net, "demo": cmd_demo,
            "bench": cmd_bench, "oracle": cmd_oracle}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        config = _config_from(args)
        return _RUNNERS[config.command](config)
    except (BodyFormatError, DimensionMismatchError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Exit codes: 0 success or pass, 1 a checked property failed, 2 usage or
domain error (bad file, bad parameters, failed preconditions).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ca_core import (SYMBOLS, CellularAutomaton, DomainError, PeriodicConfiguration,
                      format_word, load_config, load_rule, orbit, parse_word)


def render_spacetime(ca: CellularAutomaton, x: PeriodicConfiguration, steps: int,
                     fmt: str = "txt") -> bytes:
    """steps + 1 rows, row 0 the initial configuration."""
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    rows = [y.cells for y in orbit(ca, x, steps)]
    if fmt == "txt":
        return ("\n".join(format_word(r) for r in rows) + "\n").encode()
    if fmt == "pbm":
        if ca.alphabet != 2:
            raise DomainError("pbm needs a binary alphabet")
        lines = ["P1", f"{x.period} {len(rows)}"] + [" ".join(map(str, r)) for r in rows]
        return ("\n".join(lines) + "\n").encode()
    raise DomainError(f"unknown format {fmt!r}")


def parse_pbm(data: bytes):
    """Rows of a plain (P1) bitmap."""
    tokens = []
    for line in data.decode().splitlines():
        line = line.split("#", 1)[0]
        tokens += line.split()
    if not tokens or tokens[0] != "P1":
        raise DomainError("not a plain PBM")
    w, h = int(tokens[1]), int(tokens[2])
    bits = "".join(tokens[3:])
    if len(bits) != w * h or set(bits) - {"0", "1"}:
        raise DomainError("PBM body does not match its size")
    return [tuple(int(c) for c in bits[i * w:(i + 1) * w]) for i in range(h)]


def _parser():
    p = argparse.ArgumentParser(prog="rice-ca", description="Limit-set Rice theorem toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("surj", help="decide surjectivity of a rule file")
    s.add_argument("rule")
    s = sub.add_parser("orphan", help="print a shortest orphan of a rule file")
    s.add_argument("rule")

    s = sub.add_parser("code", help="build a freezing code")
    csub = s.add_subparsers(dest="code_cmd", required=True)
    c = csub.add_parser("build", help="formula-mode code")
    c.add_argument("--u", required=True, help="u_Sigma as a binary word")
    c.add_argument("--size-a", type=int, default=2)
    c.add_argument("--size-b", type=int, default=1)
    c.add_argument("--out")
    c = csub.add_parser("toy", help="search a toy code")
    c.add_argument("--u", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--pool", default=None, help="comma separated z-blocks (default 0^k)")
    c.add_argument("--size-a", type=int, default=2)
    c.add_argument("--size-b", type=int, default=1)
    c.add_argument("--out")

    s = sub.add_parser("squad", help="firing squad tools")
    ssub = s.add_subparsers(dest="squad_cmd", required=True)
    c = ssub.add_parser("validate")
    c.add_argument("--max-n", type=int, default=32)

    s = sub.add_parser("delta", help="compile a reduction instance")
    dsub = s.add_subparsers(dest="delta_cmd", required=True)
    c = dsub.add_parser("build")
    c.add_argument("manifest")
    c.add_argument("--out", help="directory for the compiled files")

    s = sub.add_parser("sim", help="simulate and render a space-time diagram")
    s.add_argument("--rule", required=True)
    s.add_argument("--config", required=True, help="configuration file or a literal word")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--render", default="txt", choices=["txt", "pbm"])
    s.add_argument("--out")

    s = sub.add_parser("verify", help="run a verification suite")
    s.add_argument("suite")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--param", action="append", default=[], help="key=value suite parameter")
    s.add_argument("--out")
    s.add_argument("--timing", action="store_true", help="append the elapsed time")

    s = sub.add_parser("nilprobe", help="bounded nilpotency probe")
    s.add_argument("--rule", required=True)
    s.add_argument("--theta", type=int, default=0)
    s.add_argument("--width", type=int, default=8)
    s.add_argument("--depth", type=int, default=4)
    return p


def _out(text: str, path=None):
    if path:
        Path(path).write_text(text)
    sys.stdout.write(text)


def _run(args) -> int:
    if args.cmd == "surj":
        from .lang_lab import is_surjective
        ans = is_surjective(load_rule(args.rule))
        print("surjective" if ans else "not surjective")
        return 0
    if args.cmd == "orphan":
        from .lang_lab import shortest_orphan
        w = shortest_orphan(load_rule(args.rule))
        print("none" if w is None else format_word(w))
        return 0
    if args.cmd == "code":
        from .freezing import SymbolCoding, build_code, code_to_text, search_toy_code
        from .lang_lab import Sft
        coding = SymbolCoding(args.size_a, args.size_b)
        u = parse_word(args.u)
        if args.code_cmd == "build":
            code = build_code(u, coding)
        else:
            pool = ([parse_word(z) for z in args.pool.split(",")] if args.pool
                    else [(0,) * args.k])
            code = search_toy_code(Sft.avoiding(u), pool, coding, args.k)
        _out(code_to_text(code), args.out)
        return 0
    if args.cmd == "squad":
        from .squad import build_squad, validate_segments
        sq = build_squad()
        rows = validate_segments(args.max_n, sq)
        ok = True
        prev = 0
        for n, t, clean in rows:
            good = clean and t is not None and t > prev and t <= 4 * n
            ok &= good
            prev = t or prev
            print(f"n={n} t={t} {'ok' if good else 'FAIL'}")
        print(f"states: {sq.n_states}")
        print(f"verdict: {'pass' if ok else 'fail'}")
        return 0 if ok else 1
    if args.cmd == "delta":
        from .delta import load_instance, save_instance
        inst = load_instance(args.manifest)
        out = Path(args.out) if args.out else Path(args.manifest).parent / "compiled"
        man = save_instance(inst, out)
        print(f"u_sigma: {format_word(inst.u_sigma)}")
        print(f"k: {inst.code.k}")
        print(f"radius: {inst.f0.radius}")
        print(f"manifest: {man}")
        return 0
    if args.cmd == "sim":
        ca = load_rule(args.rule)
        cfg = Path(args.config)
        if cfg.exists():
            x = load_config(cfg)
        elif set(args.config) <= set(SYMBOLS[:ca.alphabet]):
            x = PeriodicConfiguration(ca.alphabet, parse_word(args.config))
        else:
            raise DomainError(f"no configuration file {args.config!r}")
        data = render_spacetime(ca, x, args.steps, args.render)
        if args.out:
            Path(args.out).write_bytes(data)
        sys.stdout.write(data.decode())
        return 0
    if args.cmd == "verify":
        from .verify import run_suite
        params = {}
        for kv in args.param:
            if "=" not in kv:
                raise DomainError(f"malformed parameter {kv!r}")
            key, val = kv.split("=", 1)
            params[key] = val
        rep = run_suite(args.suite, params, args.seed, args.samples)
        _out(rep.to_text(timing=args.timing), args.out)
        return {"pass": 0, "fail": 1}.get(rep.verdict, 1)
    if args.cmd == "nilprobe":
        from .delta import nilpotency_probe
        v = nilpotency_probe(load_rule(args.rule), args.theta, args.width, args.depth)
        print(str(v))
        return 0
    raise DomainError(f"unknown command {args.cmd}")


def cli_main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        return _run(args)
    except (DomainError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

"""Command-line interface: ``coinvlat [--cache DIR] [--seed N] [--jobs N] COMMAND``."""

from __future__ import annotations

import hashlib
import json
import sys

import click
import numpy as np

from . import pipeline as pl

VERIFY_STAGES = {
    "table2": ("table2",),
    "orbits": ("orbits",),
    "table3": ("table3",),
    "table4": ("table4",),
    "theorem": ("theorem",),
    "all": pl.STAGES,
}


def _echo_json(obj) -> None:
    click.echo(json.dumps(pl._jsonable(obj), indent=1))


def _ctx(obj, name: str) -> pl.ClassContext:
    return pl.ClassContext(name, cache_dir=obj["cache"], seed=obj["seed"])


class_arg = click.argument("name", type=click.Choice(pl.CLASSES))


@click.group()
@click.option("--cache", type=click.Path(file_okay=False), default=None, help="Directory for cached isometry groups.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized group algorithms.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Classes processed in parallel.")
@click.option("-v", "--verbose", is_flag=True, help="Progress messages on stderr.")
@click.pass_context
def main(ctx, cache, seed, jobs, verbose):
    """Exact reproduction of coinvariant-lattice and label-space computations."""
    ctx.obj = {"cache": cache, "seed": seed, "jobs": jobs, "log": (lambda m: click.echo(m, err=True)) if verbose else None}


@main.command()
@class_arg
@click.option("--gamma-choice", type=int, default=0, show_default=True)
@click.pass_obj
def build(obj, name, gamma_choice):
    """Build the coinvariant lattice of a class and print it with its checks."""
    from .glue import table2_build

    bc = table2_build(name, gamma_choice)
    data = bc.to_json()
    data["checks"] = bc.checks()
    _echo_json(data)
    sys.exit(0 if all(data["checks"].values()) else 1)


@main.command()
@class_arg
@click.pass_obj
def aut(obj, name):
    """Order of the isometry group of the coinvariant lattice."""
    c = _ctx(obj, name)
    _echo_json({"class": name, "order": c.aut.order(), "generators": len(c.aut.gens), "seconds": c.timings.get("aut")})


@main.command("centralizer")
@class_arg
@click.pass_obj
def centralizer_cmd(obj, name):
    """Centralizer of g and the length of its conjugacy class."""
    c = _ctx(obj, name)
    C = c.cent
    _echo_json({"class": name, "order": C.order(), "conjugation_orbit": C.group.conjugation_orbit_length, "aut_order": c.aut.order()})


@main.command()
@class_arg
@click.pass_obj
def discform(obj, name):
    """Discriminant form: invariants and quadratic Gram matrix."""
    D = _ctx(obj, name).disc
    _echo_json({"class": name, "structure": D.structure(), "invariant_factors": list(D.invariant_factors), "module": D.to_json()})


@main.command("orthogonal-group")
@class_arg
@click.option("--module", "which", type=click.Choice(["disc", "irr"]), default="disc", show_default=True)
@click.pass_obj
def orthogonal_group_cmd(obj, name, which):
    """Order of the orthogonal group of the discriminant form or label space."""
    c = _ctx(obj, name)
    res = c.orth_disc if which == "disc" else c.orth_irr
    _echo_json({"class": name, "module": which, "structure": res.module.structure(), "order": res.order, "parts": [[p, o] for p, _, _, o in res.parts]})


@main.command("irr-space")
@class_arg
@click.pass_obj
def irr_space(obj, name):
    """Label space summary with a digest of its q-table and the size of S_g."""
    c = _ctx(obj, name)
    S = c.irr
    M = S.module
    qn = np.ascontiguousarray(M.q_num(M.elements()), dtype=np.int64)
    _echo_json(
        {
            "class": name,
            "layout": S.case,
            "structure": M.structure(),
            "size": M.size,
            "q_level": M.level,
            "q_table_sha256": hashlib.sha256(qn.tobytes()).hexdigest(),
            "Sg": len(c.sg),
            "vacuum_label": S.vacuum_label().tolist(),
            "module": M.to_json(),
        }
    )


def _run(obj, names, stages, deep):
    return pl.run_classes(names, stages, cache_dir=obj["cache"], seed=obj["seed"], deep=deep, jobs=obj["jobs"], log=obj["log"])


@main.command()
@click.argument("what", type=click.Choice(list(VERIFY_STAGES)))
@click.option("--class", "classes", multiple=True, type=click.Choice(pl.CLASSES), help="Restrict to these classes (repeatable).")
@click.option("--deep", is_flag=True, help="Run the index-3/4 product searches (slow).")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report instead of check lines.")
@click.pass_obj
def verify(obj, what, classes, deep, as_json):
    """Check one group of results against the expectations file."""
    reports = _run(obj, classes or pl.CLASSES, VERIFY_STAGES[what], deep)
    if as_json:
        _echo_json(pl.report_json(reports))
    else:
        for r in reports:
            for c in r.checks:
                click.echo(f"{r.class_tag} {c.line()}")
            if r.search.get("skipped"):
                click.echo(f"{r.class_tag} [SKIP] {r.search['method']}: {r.search['skipped']}")
    sys.exit(0 if all(r.passed for r in reports) else 1)


@main.command()
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--class", "classes", multiple=True, type=click.Choice(pl.CLASSES))
@click.option("--deep", is_flag=True)
@click.pass_obj
def report(obj, out, classes, deep):
    """Run every stage and write report.md and report.json."""
    reports = _run(obj, classes or pl.CLASSES, pl.STAGES, deep)
    md, js = pl.emit_report(reports, out)
    click.echo(f"wrote {md} and {js}")
    sys.exit(0 if all(r.passed for r in reports) else 1)


if __name__ == "__main__":
    main()

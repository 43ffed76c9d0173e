# Copyright 2025 H2so4 Consulting LLC

import json
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional

import click
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from app.config import RunConfig
from app.controllers import AppController, Outcome
from core import exporters
from core.models import InputError, ResourceLimitError
from core.pirank import DEFAULT_MAX_STATES
from core.text_utils import parse_int_list, parse_lengths

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3

app = typer.Typer(add_completion=False, no_args_is_help=True,
                  help="Primitivity rank, critical subgroups and word measures in free groups.")

log = logging.getLogger(__name__)

# shared options
RANK = typer.Option(2, "-r", "--rank", help="Rank r of the ambient free group F_r.")
SEED = typer.Option(None, "--seed", help="64-bit seed; drawn at random and echoed when omitted.")
JSON_OUT = typer.Option(False, "--json", help="Print a JSON report on stdout.")
DOT = typer.Option(None, "--dot", help="Write the resulting graph(s) to FILE in DOT format.")
MAX_STATES = typer.Option(DEFAULT_MAX_STATES, "--max-states", help="Bound on quotient search states.")
THREADS = typer.Option(1, "--threads", help="Worker threads; results do not depend on it.")
SAMPLES = typer.Option(None, "--samples", help="Number of samples.")
LAMBDA = typer.Option(None, "--lambda", help="lambda as P/Q.")
MU = typer.Option(None, "--mu", help="mu as P/Q.")
ELL = typer.Option(None, "--L", help="Integer L >= 2.")


def setup_logging(verbose: bool) -> None:
    # setup_logging: rich handler on stderr; stdout stays clean for JSON.
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )
    # setup_logging  # setup_logging


@app.callback()
def main_callback(verbose: bool = typer.Option(False, "--verbose", "-v",
                                               help="Log search progress to stderr.")):
    setup_logging(verbose)


def _config(**fields) -> RunConfig:
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        raise InputError("; ".join(err["msg"] for err in e.errors()))


def _output(json_out: bool, dot: Optional[Path]) -> str:
    if json_out:
        return "json"
    return "dot" if dot is not None else "human"


def _run(build: Callable[[], RunConfig], action: Callable[[AppController], Outcome],
         dot: Optional[Path] = None) -> None:
    # _run: build the config, run the controller action, print, and map library errors
    # to exit codes (2 for bad input, 3 for resource limits).
    err = Console(stderr=True)
    try:
        config = build()
        outcome = action(AppController(config))
    except InputError as e:
        err.print(f"[red]error:[/red] {escape(str(e))}", highlight=False)
        raise typer.Exit(EXIT_USAGE)
    except ResourceLimitError as e:
        err.print(f"[red]resource limit:[/red] {escape(str(e))} (explored {e.explored})", highlight=False)
        raise typer.Exit(EXIT_RESOURCE)

    if dot is not None:
        text = "".join(exporters.to_dot(g, name=f"G{i}") for i, g in enumerate(outcome.graphs))
        try:
            dot.write_text(text, encoding="utf-8")
        except OSError as e:
            err.print(f"[red]error:[/red] cannot write {escape(str(dot))}: {escape(str(e))}",
                      highlight=False)
            raise typer.Exit(EXIT_USAGE)
    if config.output == "json":
        body = dict(outcome.payload, config=config.header())
        typer.echo(json.dumps(body, sort_keys=True, indent=2))
    else:
        out = Console(highlight=False, soft_wrap=True)
        if config.seed is not None:
            out.print(f"seed: {config.seed}")
        for line in outcome.summary:
            out.print(line, markup=False)
    # _run  # _run


@app.command(help="Primitivity rank and critical subgroups of a word.")
def pirank(word: str = typer.Argument(..., help="Word such as abAB; '1' is the identity."),
           rank: int = RANK, json_out: bool = JSON_OUT, dot: Optional[Path] = DOT,
           max_states: int = MAX_STATES, threads: int = THREADS,
           heuristic: bool = typer.Option(False, "--heuristic",
                                          help="Prune by rank (fast, may be wrong).")):
    _run(lambda: _config(subcommand="pirank", word=word, rank=rank, max_states=max_states,
                         threads=threads, heuristic=heuristic, output=_output(json_out, dot)),
         AppController.pirank, dot)


@app.command(help="Whitehead primitivity test.")
def primitive(word: str = typer.Argument(...), rank: int = RANK, json_out: bool = JSON_OUT):
    _run(lambda: _config(subcommand="primitive", word=word, rank=rank,
                         output=_output(json_out, None)),
         AppController.primitive)


@app.command(help="Stallings graph of the subgroup generated by the given words.")
def stallings(generators: List[str] = typer.Argument(..., help="Subgroup generators."),
              rank: int = RANK, json_out: bool = JSON_OUT, dot: Optional[Path] = DOT):
    _run(lambda: _config(subcommand="stallings", generators=generators, rank=rank,
                         output=_output(json_out, dot)),
         AppController.stallings, dot)


@app.command(help="Fold a labeled graph read from JSON.")
def fold(graph_file: Path = typer.Argument(..., help="Graph JSON file."),
         rank: int = RANK, json_out: bool = JSON_OUT, dot: Optional[Path] = DOT):
    _run(lambda: _config(subcommand="fold", graph_file=str(graph_file), rank=rank,
                         output=_output(json_out, dot)),
         AppController.fold, dot)


@app.command(help="The (lambda, mu, L) small cancellation and readability condition.")
def check(word: str = typer.Argument(...), rank: int = RANK,
          lam: Optional[str] = LAMBDA, mu: Optional[str] = MU, L: Optional[int] = ELL,
          full: bool = typer.Option(True, "--full/--word-only",
                                    help="Check every long subword, or the word alone."),
          cyclic_subwords: bool = typer.Option(False, "--cyclic-subwords",
                                               help="Read 2-letter subwords cyclically."),
          verify: bool = typer.Option(False, "--verify",
                                      help="Also compute pi(w) for words in P'."),
          json_out: bool = JSON_OUT, max_states: int = MAX_STATES, threads: int = THREADS):
    _run(lambda: _config(subcommand="check", word=word, rank=rank, lam=lam, mu=mu, L=L,
                         mode="full" if full else "word-only", cyclic_subwords=cyclic_subwords,
                         verify=verify, max_states=max_states, threads=threads,
                         output=_output(json_out, None)),
         AppController.check)


@app.command(name="survey", help="Fractions of words with pi = r, Crit = {F_r}, and related properties.")
def survey_cmd(lengths: str = typer.Option(..., "--lengths", help="A..B or a comma list."),
               samples: Optional[int] = SAMPLES,
               exhaustive: bool = typer.Option(False, "--exhaustive"),
               free: bool = typer.Option(False, "--free",
                                         help="All reduced words instead of cyclically reduced."),
               rank: int = RANK, seed: Optional[int] = SEED,
               lam: Optional[str] = LAMBDA, mu: Optional[str] = MU, L: Optional[int] = ELL,
               heuristic: bool = typer.Option(False, "--heuristic"),
               json_out: bool = JSON_OUT, max_states: int = MAX_STATES,
               threads: int = THREADS):
    _run(lambda: _config(subcommand="survey", lengths=parse_lengths(lengths),
                         samples=samples, exhaustive=exhaustive, cyclic=not free, rank=rank,
                         seed=seed, lam=lam, mu=mu, L=L, heuristic=heuristic,
                         max_states=max_states, threads=threads,
                         output=_output(json_out, None)).with_seed(),
         lambda c: c.survey(progress=not json_out))


@app.command(help="Uniform random words of a given length.")
def sample(length: int = typer.Argument(...), samples: Optional[int] = SAMPLES,
           cyclic: bool = typer.Option(False, "--cyclic", help="Cyclically reduced words."),
           rank: int = RANK, seed: Optional[int] = SEED, json_out: bool = JSON_OUT):
    _run(lambda: _config(subcommand="sample", length=length, samples=samples, cyclic=cyclic,
                         rank=rank, seed=seed, output=_output(json_out, None)).with_seed(),
         AppController.sample)


@app.command(name="enumerate", help="Every reduced word of a given length, in order.")
def enumerate_cmd(length: int = typer.Argument(...),
                  cyclic: bool = typer.Option(False, "--cyclic"),
                  classes: bool = typer.Option(False, "--classes",
                                               help="One word per rotation class."),
                  rank: int = RANK, json_out: bool = JSON_OUT):
    _run(lambda: _config(subcommand="enumerate", length=length, cyclic=cyclic,
                         classes=classes, rank=rank, output=_output(json_out, None)),
         AppController.enumerate)


@app.command(help="Expected fixed points of w on random permutations.")
def wordmeasure(word: str = typer.Argument(...),
                N: Optional[int] = typer.Option(None, "--N", help="Degree of S_N."),
                samples: Optional[int] = SAMPLES,
                exact: bool = typer.Option(False, "--exact", help="Enumerate S_N exactly."),
                compare: Optional[str] = typer.Option(None, "--compare", help="N1,N2,..."),
                pi: Optional[str] = typer.Option(None, "--pi", help="Known pi(w) (or 'inf')."),
                crit_size: Optional[int] = typer.Option(None, "--crit-size",
                                                        help="Known |Crit(w)|."),
                rank: int = RANK, seed: Optional[int] = SEED, json_out: bool = JSON_OUT,
                max_states: int = MAX_STATES, threads: int = THREADS):
    _run(lambda: _config(subcommand="wordmeasure", word=word, N=N, samples=samples,
                         exact=exact, compare=parse_int_list(compare) if compare else None,
                         pi=pi, crit_size=crit_size, rank=rank, seed=seed,
                         max_states=max_states, threads=threads,
                         output=_output(json_out, None)).with_seed(),
         AppController.wordmeasure)


def dispatch(argv: Optional[List[str]] = None) -> int:
    # dispatch: run the CLI on argv and return its exit code (0, 2 or 3).
    command = typer.main.get_command(app)
    try:
        rc = command.main(args=argv, prog_name="primrank", standalone_mode=False)
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    return rc if isinstance(rc, int) else EXIT_OK
    # dispatch  # dispatch


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
    # __main__ guard  # __main__ guard

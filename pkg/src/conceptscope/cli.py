"""Command-line surface.

Exit codes: 0 all requested computations succeeded; 1 an internal
consistency check failed (oracle mismatch, failed verification suite);
2 invalid inputs or parameters; 3 an undefined measure requested in
strict mode.

All command output is byte-stable for fixed inputs, seeds and thread
counts. Set CONCEPTSCOPE_LOG=debug|info|warning for stderr logging.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from conceptscope import report as report_mod
from conceptscope.completeness import completeness_brute_force, completeness_closed_form
from conceptscope.dataset import load_dataset
from conceptscope.embeddings import VectorEntry, dump_vector_file, load_vector_file
from conceptscope.errors import (
    ConceptScopeError,
    DomainError,
    OracleMismatchError,
    ParseError,
    ValidationError,
)
from conceptscope.measures import (
    CLASS_CONDITIONED,
    CONCEPT_CONDITIONED,
    SYMMETRIC,
    hoeffding_sample_size,
)
from conceptscope.prompts import (
    CLASS_PROMPT,
    CONCEPT_PROMPT,
    EditPlan,
    PromptEmbedding,
    classify,
    edit_prompt,
    evaluate,
)
from conceptscope.tcav import (
    EmbeddedExample,
    LinearConceptModel,
    class_conditioned_from_embeddings,
    decision_margin,
    tcav_continuous,
    tcav_discrete,
)
from conceptscope.verify import run_axioms_suite, run_theorem1_suite, run_theorem2_suite
from conceptscope.votes import load_votes_csv, metrics_at_k

_MEASURE_CHOICES = {
    "symmetric": SYMMETRIC,
    "class-conditioned": CLASS_CONDITIONED,
    "concept-conditioned": CONCEPT_CONDITIONED,
}


def _cli_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConceptScopeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


def _read_file(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write_output(data: bytes, output: str) -> None:
    if output == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(output).write_bytes(data)


def _emit_json(payload: object, output: str) -> None:
    _write_output((json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"), output)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Worker threads for fan-out work; results do not depend on it.",
)
@click.pass_context
def main(ctx: click.Context, threads: int) -> None:
    """Concept-importance measures, verification suites and prompt editing."""
    level = os.environ.get("CONCEPTSCOPE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    ctx.obj = {"threads": threads}


def _parse_dataset_spec(spec: str) -> tuple[str, str]:
    label, sep, path = spec.partition("=")
    if not sep or not label or not path:
        raise DomainError(f"dataset must be LABEL=PATH, got {spec!r}")
    return label, path


@main.command("measure")
@click.option("--dataset", "-d", "dataset_specs", multiple=True, required=True,
              metavar="LABEL=PATH", help="Dataset JSONL with a series label; repeatable.")
@click.option("--measure", "-m", "measure_name",
              type=click.Choice(sorted(_MEASURE_CHOICES)), default="symmetric",
              show_default=True)
@click.option("--theta", type=float, default=None,
              help="Threshold for the concept-conditioned measure.")
@click.option("--delta", type=float, default=None,
              help="Attach Hoeffding confidence radii at this delta.")
@click.option("--ground-truth", "include_ground_truth", is_flag=True,
              help="Add per-dataset ground-truth comparison series.")
@click.option("--format", "-f", "fmt", type=click.Choice(["csv", "json", "svg"]),
              default="csv", show_default=True)
@click.option("--output", "-o", default="-", show_default=True)
@click.option("--positive-only", is_flag=True,
              help="Figure-style filter: keep concepts with a positive value somewhere.")
@click.option("--strict", is_flag=True,
              help="Fail (exit 3) on undefined measures instead of rendering n/a.")
@click.option("--schema-mode", type=click.Choice(["infer", "strict"]), default="infer",
              show_default=True)
@click.option("--schema", default=None,
              help="Comma-separated concept names, required with --schema-mode strict.")
@click.pass_context
@_cli_errors
def measure_cmd(ctx, dataset_specs, measure_name, theta, delta, include_ground_truth,
                fmt, output, positive_only, strict, schema_mode, schema):
    """Per-concept measure table over one or more datasets."""
    kind = _MEASURE_CHOICES[measure_name]
    if schema and schema_mode != "strict":
        raise DomainError("--schema requires --schema-mode strict")
    schema_names = [s.strip() for s in schema.split(",")] if schema else None
    datasets = []
    for spec in dataset_specs:
        label, path = _parse_dataset_spec(spec)
        datasets.append(
            (label, load_dataset(_read_file(path), schema_mode, schema=schema_names))
        )
    cells = report_mod.compute_measure_table(
        datasets,
        kind,
        theta=theta,
        delta=delta,
        include_ground_truth=include_ground_truth,
        strict=strict,
        threads=ctx.obj["threads"],
    )
    if positive_only:
        cells = report_mod.filter_positive(cells)
    if fmt == "csv":
        data = report_mod.render_csv(cells)
    elif fmt == "json":
        data = report_mod.render_json(cells, kind=kind, theta=theta, delta=delta)
    else:
        title = kind if theta is None else f"{kind} (theta={theta:g})"
        data = report_mod.render_svg(cells, title=title)
    _write_output(data, output)


ORACLE_TOLERANCE = 1e-12


@main.command("completeness")
@click.argument("dataset_path", metavar="DATASET")
@click.argument("concept")
@click.option("--oracle", is_flag=True,
              help="Also run the brute-force decoder maximum and require agreement.")
@click.option("--output", "-o", default="-", show_default=True)
@_cli_errors
def completeness_cmd(dataset_path, concept, oracle, output):
    """Completeness score of a binary CONCEPT on DATASET."""
    dataset = load_dataset(_read_file(dataset_path))
    closed = completeness_closed_form(dataset, concept)
    payload = {
        "concept": concept,
        "closed_form": {
            "value": closed.value,
            "per_level_terms": {str(k): list(v) for k, v in closed.per_level_terms.items()},
        },
        "brute_force": None,
        "difference": None,
    }
    if oracle:
        brute = completeness_brute_force(dataset, concept)
        difference = abs(closed.value - brute.value)
        payload["brute_force"] = {"value": brute.value}
        payload["difference"] = difference
        if difference > ORACLE_TOLERANCE:
            raise OracleMismatchError(
                f"closed form {closed.value!r} and brute force {brute.value!r}"
                f" differ by {difference:e} (> {ORACLE_TOLERANCE:g})"
            )
    _emit_json(payload, output)


def _load_model(path: str) -> LinearConceptModel:
    try:
        obj = json.loads(_read_file(path).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid model file {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError(f"model file {path} must be a JSON object")
    for key in ("dim", "w_h", "theta_h", "v"):
        if key not in obj:
            raise ValidationError(f"model file {path} is missing {key!r}")
    dim = obj["dim"]
    w_h = np.asarray(obj["w_h"], dtype=np.float64)
    v = np.asarray(obj["v"], dtype=np.float64)
    for name, vec in (("w_h", w_h), ("v", v)):
        if vec.ndim != 1 or vec.shape[0] != dim:
            raise ValidationError(f"model {name} must be a vector of dim {dim}")
        norm = float(np.linalg.norm(vec))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValidationError(f"model {name} cannot be normalized")
    return LinearConceptModel(
        w_h=w_h / float(np.linalg.norm(w_h)),
        theta_h=float(obj["theta_h"]),
        v=v / float(np.linalg.norm(v)),
        dim=int(dim),
    )


@main.command("tcav")
@click.argument("model_path", metavar="MODEL")
@click.argument("embeddings_path", metavar="EMBEDDINGS")
@click.option("--output", "-o", default="-", show_default=True)
@_cli_errors
def tcav_cmd(model_path, embeddings_path, output):
    """Concept scores of a linear head over an embedding file."""
    model = _load_model(model_path)
    vector_file = load_vector_file(_read_file(embeddings_path))
    if vector_file.dim != model.dim:
        raise ValidationError(
            f"embedding dim {vector_file.dim} does not match model dim {model.dim}"
        )
    examples = [EmbeddedExample(id=e.id, embedding=e.values) for e in vector_file.entries]
    members = [ex for ex in examples if decision_margin(model, ex) > 0.0]
    conditional = class_conditioned_from_embeddings(model, examples)
    continuous = tcav_continuous(model, members)
    payload = {
        "tcav": tcav_discrete(model, members),
        "tcav_con": continuous,
        "class_conditioned": conditional,
        "gap": abs(conditional - continuous),
    }
    _emit_json(payload, output)


@main.command("plan")
@click.option("--epsilon", type=float, required=True)
@click.option("--delta", type=float, required=True)
@_cli_errors
def plan_cmd(epsilon, delta):
    """Print the sample count needed for radius EPSILON at confidence DELTA."""
    click.echo(str(hoeffding_sample_size(epsilon, delta)))


def _load_plans(path: str) -> list[EditPlan]:
    try:
        obj = json.loads(_read_file(path).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid plan file {path}: {exc}") from None
    raw_plans = obj if isinstance(obj, list) else [obj]
    plans = []
    for index, raw in enumerate(raw_plans):
        if not isinstance(raw, dict):
            raise ValidationError(f"plan[{index}] must be an object")
        try:
            plans.append(
                EditPlan(
                    class_name=raw["class_name"],
                    concept_names=tuple(raw["concept_names"]),
                    lam=float(raw["lambda"]),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"plan[{index}] is missing {exc.args[0]!r}") from None
    if not plans:
        raise ValidationError(f"plan file {path} contains no plans")
    return plans


@main.command("edit")
@click.argument("prompts_path", metavar="PROMPTS")
@click.argument("concepts_path", metavar="CONCEPTS")
@click.argument("plan_path", metavar="PLAN")
@click.argument("images_path", metavar="IMAGES")
@click.option("--out-prompts", default=None, metavar="PATH",
              help="Write the edited prompt vectors to this file.")
@click.option("--renormalize", is_flag=True,
              help="Renormalize edited prompts to unit norm (off by default).")
@click.option("--output", "-o", default="-", show_default=True)
@_cli_errors
def edit_cmd(prompts_path, concepts_path, plan_path, images_path, out_prompts,
             renormalize, output):
    """Apply edit PLAN to PROMPTS and evaluate on labeled IMAGES."""
    prompt_file = load_vector_file(_read_file(prompts_path))
    concept_file = load_vector_file(_read_file(concepts_path))
    if prompt_file.dim != concept_file.dim:
        raise ValidationError(
            f"prompt dim {prompt_file.dim} does not match concept dim {concept_file.dim}"
        )
    class_prompts = [
        PromptEmbedding(name=e.id, vector=e.values, kind=CLASS_PROMPT)
        for e in prompt_file.entries
    ]
    concepts = {
        e.id: PromptEmbedding(name=e.id, vector=e.values, kind=CONCEPT_PROMPT)
        for e in concept_file.entries
    }
    plans = _load_plans(plan_path)

    image_file = load_vector_file(_read_file(images_path))
    if image_file.dim != prompt_file.dim:
        raise ValidationError(
            f"image dim {image_file.dim} does not match prompt dim {prompt_file.dim}"
        )
    for entry in image_file.entries:
        if entry.label is None:
            raise ValidationError(f"image {entry.id!r} has no 'label'; evaluation needs one")
    images = [(e.values, e.label) for e in image_file.entries]

    edited_prompts = list(class_prompts)
    for plan in plans:
        position = next(
            (i for i, p in enumerate(edited_prompts) if p.name == plan.class_name), None
        )
        if position is None:
            raise ValidationError(f"plan names unknown class {plan.class_name!r}")
        try:
            subtract = [concepts[name] for name in plan.concept_names]
        except KeyError as exc:
            raise ValidationError(f"plan names unknown concept {exc.args[0]!r}") from None
        edited_prompts[position] = edit_prompt(
            class_prompts[position], subtract, plan.lam, renormalize=renormalize
        )

    original_eval = evaluate([(classify(x, class_prompts), label) for x, label in images])
    edited_eval = evaluate([(classify(x, edited_prompts), label) for x, label in images])
    payload = {
        "original": {
            "accuracy": original_eval.accuracy,
            "macro_f1": original_eval.macro_f1,
            "per_class": original_eval.per_class,
        },
        "edited": {
            "accuracy": edited_eval.accuracy,
            "macro_f1": edited_eval.macro_f1,
            "per_class": edited_eval.per_class,
        },
        "plans": [
            {"class_name": p.class_name, "concept_names": list(p.concept_names),
             "lambda": p.lam}
            for p in plans
        ],
    }
    if out_prompts:
        entries = [VectorEntry(id=p.name, values=p.vector) for p in edited_prompts]
        Path(out_prompts).write_bytes(dump_vector_file(prompt_file.dim, entries))
    _emit_json(payload, output)


@main.command("votes")
@click.argument("votes_path", metavar="VOTES_CSV")
@click.option("--k", "ks", multiple=True, type=int, default=(1, 3, 5), show_default=True)
@click.option("--output", "-o", default="-", show_default=True)
@_cli_errors
def votes_cmd(votes_path, ks, output):
    """Accuracy and recall of thresholded concept labels at each k."""
    records = load_votes_csv(_read_file(votes_path))
    lines = ["k,accuracy,recall"]
    for k in ks:
        metrics = metrics_at_k(records, k)
        lines.append(f"{k},{metrics.accuracy!r},{metrics.recall!r}")
    _write_output(("\n".join(lines) + "\n").encode("utf-8"), output)


@main.command("verify")
@click.option("--suite", type=click.Choice(["axioms", "theorem1", "theorem2"]),
              required=True)
@click.option("--trials", type=click.IntRange(min=1), default=None,
              help="Defaults: 1000 (axioms, theorem1) or 500 (theorem2).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epsilon", type=float, default=0.2, show_default=True)
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--dim", type=int, default=8, show_default=True)
@click.option("--records", "records_path", default=None, metavar="PATH",
              help="Write one JSONL record per theorem2 trial.")
@click.pass_context
@_cli_errors
def verify_cmd(ctx, suite, trials, seed, epsilon, delta, dim, records_path):
    """Run a verification suite; exit 0 only if every check passes."""
    threads = ctx.obj["threads"]
    if suite == "axioms":
        report = run_axioms_suite(trials or 1000, seed, threads=threads)
    elif suite == "theorem1":
        report = run_theorem1_suite(trials or 1000, seed, threads=threads)
    else:
        report, trial_records = run_theorem2_suite(
            epsilon, delta, dim, trials or 500, seed, threads=threads
        )
        if records_path:
            lines = [
                json.dumps(
                    {
                        "trial": i,
                        "dim": dim,
                        "epsilon": epsilon,
                        "delta": delta,
                        "lhs_gap": r.lhs_gap,
                        "n_used": r.n_used,
                        "bound_holds": r.bound_holds,
                    },
                    sort_keys=True,
                )
                for i, r in enumerate(trial_records)
            ]
            Path(records_path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    for line in report.lines:
        click.echo(line)
    for failure in report.failures:
        click.echo(json.dumps(failure, sort_keys=True))
    if not report.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()

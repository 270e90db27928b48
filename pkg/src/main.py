#!/usr/bin/env python3
"""
Incident Desk - command line entry point
"""
import os
import sys
import json
import logging
import argparse
from dataclasses import replace

from tqdm import tqdm

from agents.backends import ChatParams, build_backend
from agents.profiles import EXPERT_ROLES, Role
from bench.cases import load_cases, save_cases
from bench.evaluation import average_results, evaluate, score_case
from bench.split import split
from evolution.quality import judge_quality
from evolution.reflection import reflect
from evolution.rollouts import build_rollouts, export_rollouts
from knowledge.embedding import build_embedder
from knowledge.store import KnowledgeBaseSet
from orchestration.report import load_report
from orchestration.workflow import FAILURE, SUCCESS, DiagnosisWorkflow, IncidentSession, MitigationVerdict
from processors.pipeline import MODALITIES, DataProcessor
from telemetry.loader import load_dataset
from telemetry.model import TimeWindow, slice_window
from ui.style import banner, status
from utils.config import load_config
from utils.errors import EXIT_OK, ConfigError, DatasetError, DeskError, exit_code_for
from utils.file_utils import create_directory_if_not_exists, read_jsonl, write_jsonl
from utils.logging_setup import setup_logging
from utils.timeparse import to_unix_seconds


logger = logging.getLogger("incident_desk")


def _config(args):
    config = load_config(args.config)
    backend = config.backend
    if getattr(args, "backend", None):
        backend = replace(backend, kind=args.backend)
    if getattr(args, "fixture", None):
        backend = replace(backend, fixture=args.fixture)
    workflow = config.workflow
    if getattr(args, "max_rounds", None) is not None:
        workflow = replace(workflow, max_rounds=args.max_rounds)
    if getattr(args, "no_knowledge", False):
        workflow = replace(workflow, use_knowledge=False)
    if getattr(args, "raw_evidence", False):
        workflow = replace(workflow, textual_descriptions=False)
    kb = config.kb
    if getattr(args, "kb_dir", None):
        kb = replace(kb, dir=args.kb_dir)
    return replace(config, backend=backend, workflow=workflow, kb=kb)


def _knowledge(config):
    kb_set = KnowledgeBaseSet(config.kb, build_embedder(config.kb))
    kb_set.load(config.kb.dir)
    return kb_set


def _workflow(config, backend, kb_set):
    return DiagnosisWorkflow(
        backend=backend,
        processor=DataProcessor.from_config(config),
        kb_set=kb_set,
        config=config.workflow,
        labels=config.labels,
        params=ChatParams(config.backend.temperature, config.backend.max_tokens, config.backend.seed),
        tz_name=config.time.timezone,
    )


def _case_query(args):
    """(case_id, query, truth or None) from --query or --cases/--case"""
    if args.cases:
        cases = {case.case_id: case for case in load_cases(args.cases)}
        if args.case not in cases:
            raise DatasetError(f"Case {args.case!r} not found in {args.cases}")
        case = cases[args.case]
        return case.case_id, case.query, case
    if not args.query:
        raise ConfigError("diagnose needs --query or --cases with --case")
    return args.case or "case", args.query, None


def _window(start, end, tz_name):
    try:
        return TimeWindow(to_unix_seconds(start, tz_name), to_unix_seconds(end, tz_name))
    except ValueError as e:
        raise ConfigError(f"Bad analysis window {start!r} .. {end!r}: {e}") from e


def cmd_process(args):
    config = _config(args)
    window = _window(args.start, args.end, config.time.timezone)
    bundle = load_dataset(args.data)
    sliced = slice_window(bundle, window, warmup=config.metrics.window)
    descriptions = DataProcessor.from_config(config).describe(sliced)
    texts = descriptions.texts()
    if args.out:
        create_directory_if_not_exists(os.path.dirname(args.out))
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(texts, fh, sort_keys=True, ensure_ascii=False, indent=2)
        status(f"Descriptions written to {args.out}", "ok")
    else:
        for modality in MODALITIES:
            banner(modality.upper())
            print(texts[modality])
    return EXIT_OK


def cmd_diagnose(args):
    config = _config(args)
    backend = build_backend(config.backend)
    kb_set = _knowledge(config)
    workflow = _workflow(config, backend, kb_set)
    bundle = load_dataset(args.data)

    if args.feedback_from:
        if not args.verdict:
            raise ConfigError("--feedback-from needs --verdict success|failure")
        previous = load_report(args.feedback_from)
        session = IncidentSession(workflow, previous.query, bundle, previous.case_id)
        history = [load_report(path) for path in args.history or ()]
        session.resume(history + [previous])
    else:
        case_id, query, _ = _case_query(args)
        session = IncidentSession(workflow, query, bundle, case_id)
        report = session.start()
        report.save(args.out)
        status(f"Case {case_id}: final {report.final}", "ok")

    if args.verdict:
        outcome = session.feedback(MitigationVerdict(args.verdict, args.note))
        for report in outcome.reports:
            report.save(args.out)
        status(f"Case {session.case_id}: {outcome.status} after {len(outcome.reports)} attempt(s)",
               "ok" if outcome.status != "unresolved" else "warn")
        latest = outcome.latest
        if latest.confirmed and config.workflow.use_knowledge and not args.no_reflect:
            correctness = {task: True for task in latest.tasks if latest.final.get(task.key) is not None}
            reflection = reflect(latest, correctness, backend, kb_set)
            kb_set.save(config.kb.dir)
            status(f"Reflected {len(reflection.results)} knowledge entries", "ok")
    return EXIT_OK


def _predict(workflow, bundle, cases, label=""):
    predictions = {}
    for case in tqdm(cases, desc=label or "Diagnosing", unit="case"):
        report = workflow.run_diagnosis(case.query, bundle, case.case_id)
        predictions[case.case_id] = report.final
    return predictions


def cmd_evaluate(args):
    cases = load_cases(args.cases)
    truths = {case.case_id: case for case in cases}
    results = []
    if args.predictions:
        for path in args.predictions:
            predictions = {record["case_id"]: record["final"] for record in read_jsonl(path)}
            results.append(evaluate(predictions, truths))
    else:
        if not args.data:
            raise ConfigError("evaluate needs --predictions or --data")
        config = _config(args)
        bundle = load_dataset(args.data)
        for run in range(args.runs):
            workflow = _workflow(config, build_backend(config.backend), _knowledge(config))
            predictions = _predict(workflow, bundle, cases, f"Run {run + 1}/{args.runs}")
            if args.save_predictions:
                path = args.save_predictions if args.runs == 1 else f"{args.save_predictions}.run{run + 1}"
                write_jsonl(path, [{"case_id": c, "final": f} for c, f in sorted(predictions.items())])
            results.append(evaluate(predictions, truths))

    result = results[0] if len(results) == 1 else average_results(results)
    status(f"Correct: {result.correct_rate:.3f}  Partial: {result.partial_rate:.3f}  "
           f"(N={result.n}, runs={result.runs})", "ok")
    if args.out:
        create_directory_if_not_exists(os.path.dirname(args.out))
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, sort_keys=True, indent=2)
    return EXIT_OK


def cmd_split(args):
    train, test = split(load_cases(args.cases), args.ratio, args.seed)
    create_directory_if_not_exists(args.out_dir)
    save_cases(os.path.join(args.out_dir, "train.jsonl"), train)
    save_cases(os.path.join(args.out_dir, "test.jsonl"), test)
    status(f"Split {len(train) + len(test)} cases: {len(train)} train, {len(test)} test", "ok")
    return EXIT_OK


def cmd_evolve(args):
    config = _config(args)
    backend = build_backend(config.backend)
    kb_set = _knowledge(config)
    workflow = _workflow(config, backend, kb_set)
    bundle = load_dataset(args.data)
    cases = load_cases(args.cases)
    reflect_enabled = config.workflow.use_knowledge and config.evolve.reflect and not args.no_reflect
    export_enabled = config.evolve.export and not args.no_export
    out_path = args.out or config.evolve.rollouts_file

    written = reflected = 0
    results = []
    for run in range(args.runs):
        predictions = {}
        for case in tqdm(cases, desc=f"Evolving {run + 1}/{args.runs}", unit="case"):
            report = workflow.run_diagnosis(case.query, bundle, case.case_id)
            predictions[case.case_id] = report.final
            correctness = score_case(report.final, case)
            qualities = {}
            for task in report.tasks:
                answer = report.answer_for(task)
                rationale = answer.rationale if answer else ()
                qualities[task.role] = judge_quality(rationale, backend, config.evolve.judge_role).scores
            if export_enabled:
                rollouts = build_rollouts(report, correctness, qualities, config.evolve.alpha, run=run + 1)
                written += export_rollouts(rollouts, out_path)
            if reflect_enabled:
                reflected += len(reflect(report, correctness, backend, kb_set, offline=True).results)
        results.append(evaluate(predictions, {case.case_id: case for case in cases}))

    if reflect_enabled:
        kb_set.save(config.kb.dir)
    result = average_results(results)
    status(f"Train Correct: {result.correct_rate:.3f}  Partial: {result.partial_rate:.3f}", "ok")
    status(f"Exported {written} rollouts, reflected {reflected} knowledge entries", "ok")
    return EXIT_OK


def cmd_kb(args):
    config = _config(args)
    kb_set = _knowledge(config)
    roles = [Role(args.role)] if args.role else list(EXPERT_ROLES)
    if args.action == "compact":
        for role in roles:
            removed = kb_set[role].compact()
            status(f"{role.value}: compacted away {removed} entries", "ok")
        kb_set.save(config.kb.dir)
        return EXIT_OK

    for role in roles:
        store = kb_set[role]
        banner(f"{role.value} ({len(store)} entries)")
        for index, entry in enumerate(store.entries):
            if args.action == "list":
                print(f"[{index}] {entry.case_id} @ {entry.created_at}: {entry.symptoms}")
            else:
                print(f"[{index}] case {entry.case_id}, created {entry.created_at}")
                print(f"  symptoms: {entry.symptoms}")
                print(f"  experience: {entry.experience}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="incident-desk", description="Multi-agent incident diagnosis")
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument("--log-level", help="Override logging.level")
    parser.add_argument("--log-file", help="Override logging.file")
    sub = parser.add_subparsers(dest="command", required=True)

    def runtime_flags(p):
        p.add_argument("--backend", choices=("http", "scripted"))
        p.add_argument("--fixture", help="Scripted backend fixture (JSON or YAML)")
        p.add_argument("--kb-dir", help="Knowledge store directory")
        p.add_argument("--max-rounds", type=int, help="Cross-review round cap")
        p.add_argument("--no-knowledge", action="store_true", help="Disable retrieval (pure chain-of-thought)")
        p.add_argument("--raw-evidence", action="store_true", help="Feed raw filtered records instead of descriptions")

    p = sub.add_parser("process", help="Run the data processor on one window")
    p.add_argument("--data", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--end", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("diagnose", help="Diagnose one incident end to end")
    runtime_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--query")
    p.add_argument("--cases")
    p.add_argument("--case")
    p.add_argument("--out", default="reports")
    p.add_argument("--feedback-from", help="report.json of the attempt being judged")
    p.add_argument("--history", nargs="*", help="report.json files of earlier attempts")
    p.add_argument("--verdict", choices=(SUCCESS, FAILURE))
    p.add_argument("--note")
    p.add_argument("--no-reflect", action="store_true")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("evaluate", help="Score predictions against ground truth")
    runtime_flags(p)
    p.add_argument("--cases", required=True)
    p.add_argument("--predictions", nargs="*")
    p.add_argument("--data")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--save-predictions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split", help="Seeded train/test split")
    p.add_argument("--cases", required=True)
    p.add_argument("--ratio", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evolve", help="Diagnose, judge, reflect and export rollouts over a training split")
    runtime_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--out", help="Rollout file")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--no-reflect", action="store_true")
    p.add_argument("--no-export", action="store_true")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("kb", help="List, inspect or compact knowledge stores")
    p.add_argument("action", choices=("list", "inspect", "compact"))
    p.add_argument("--kb-dir")
    p.add_argument("--role", choices=[role.value for role in EXPERT_ROLES])
    p.set_defaults(func=cmd_kb)
    return parser


def main(argv=None):
    """Run the command line; returns the process exit code"""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        setup_logging(args.log_level or config.logging.level, args.log_file or config.logging.file)
        if getattr(args, "runs", 1) < 1:
            raise ConfigError("--runs must be at least 1")
        return args.func(args)
    except DeskError as e:
        logger.error(f"{type(e).__name__}: {e}")
        status(f"Error: {e}", "error")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Offline subcommands (generate-corpus, train-context, train-reason,
calibrate, evaluate) operate on an artifacts directory; `serve` exposes the
trained bot over stdio, TCP or HTTP; `chat` is a thin line-protocol client
for a running TCP server.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .corpus import CorpusSpec
from .errors import TriagebotError
from .reasons import HeadConfig
from .routing import RuleSet
from .workflows import (
    ArtifactPaths,
    calibrate_pipeline,
    evaluate_pipeline,
    generate_corpus_files,
    load_engine_from_artifacts,
    train_context_pipeline,
    train_reason_pipeline,
)

logger = logging.getLogger(__name__)

ENV_ARTIFACTS = "TRIAGEBOT_ARTIFACTS"
ENV_BIND = "TRIAGEBOT_BIND"


def _paths(namespace) -> ArtifactPaths:
    root = namespace.artifacts or os.environ.get(ENV_ARTIFACTS) or "artifacts"
    return ArtifactPaths(root=Path(root))


def _print(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_generate_corpus(args) -> int:
    paths = _paths(args)
    spec = CorpusSpec(seed=args.seed, size=args.size, ambiguity_rate=args.ambiguity_rate)
    stats = generate_corpus_files(spec, paths)
    _print(stats)
    return 0


def cmd_train_context(args) -> int:
    paths = _paths(args)
    stats = train_context_pipeline(paths, seed=args.seed, search_budget=args.budget)
    _print(stats)
    return 0


def cmd_train_reason(args) -> int:
    paths = _paths(args)
    head = HeadConfig(
        kind=args.head,
        hidden_sizes=tuple(args.hidden) if args.head == "mlp" else (),
    )
    stats = train_reason_pipeline(
        paths,
        provider_kind=args.provider,
        head=head,
        min_class_count=args.min_class_count,
        endpoint=args.endpoint,
        dimension=args.dimension,
    )
    _print(stats)
    return 0


def cmd_calibrate(args) -> int:
    paths = _paths(args)
    stats = calibrate_pipeline(paths, coverage=args.coverage)
    _print(stats)
    return 0


def cmd_evaluate(args) -> int:
    paths = _paths(args)
    rules = RuleSet.from_file(args.rules) if args.rules else RuleSet()
    stats = evaluate_pipeline(paths, rules=rules, include_reference=not args.no_reference)
    if args.report:
        print(paths.report_txt.read_text(encoding="utf-8"))
    else:
        _print(stats)
    return 0


def cmd_serve(args) -> int:
    from .service.runtime import SessionRuntime

    paths = _paths(args)
    rules = RuleSet.from_file(args.rules) if args.rules else RuleSet()
    engine = load_engine_from_artifacts(paths, deterministic_seed=0, rules=rules)
    runtime = SessionRuntime(engine, deterministic=args.deterministic)

    if args.stdio:
        from .service.lineserver import serve_stdio

        serve_stdio(runtime, sys.stdin, sys.stdout)
        return 0

    bind = args.bind or os.environ.get(ENV_BIND) or "127.0.0.1:7651"
    host, _, port_text = bind.rpartition(":")
    port = int(port_text)

    if args.http:
        import uvicorn

        from .service.api import create_app
        from .workflows import load_context_bundle, load_reason_bundle

        app = create_app(
            runtime,
            context_model=load_context_bundle(paths.context_bundle),
            reason_model=load_reason_bundle(paths.reason_bundle),
        )
        uvicorn.run(app, host=host, port=port, log_level="info")
        return 0

    import asyncio

    from .service.lineserver import serve_tcp

    try:
        asyncio.run(serve_tcp(runtime, host, port))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_chat(args) -> int:
    """Interactive thin client against a running TCP line server."""
    import socket
    import threading
    import uuid

    host, _, port_text = args.connect.rpartition(":")
    profile = {}
    if args.profile:
        profile = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    session_id = args.session_id or f"chat-{uuid.uuid4().hex[:8]}"
    done = threading.Event()

    with socket.create_connection((host, int(port_text))) as sock:
        stream = sock.makefile("rw", encoding="utf-8", newline="\n")

        def send(doc: dict) -> None:
            stream.write(json.dumps(doc, ensure_ascii=False) + "\n")
            stream.flush()

        def reader() -> None:
            for line in stream:
                doc = json.loads(line)
                kind = doc.get("type")
                if kind == "bot_message":
                    print(f"\rbot> {doc['text']}")
                elif kind == "routing_decision":
                    mode = "auto" if doc["auto_routed"] else "human triage"
                    reasons = ", ".join(
                        f"{t['reason']}={t['probability']:.3f}" for t in doc["top_reasons"])
                    print(f"\r-- routed to {doc['department']} ({mode}); top reasons: {reasons}")
                elif kind == "error":
                    print(f"\rerror[{doc['code']}]: {doc['message']}")
                elif kind == "session_end":
                    print("\r-- session closed")
                    done.set()
                    return
            done.set()

        thread = threading.Thread(target=reader, daemon=True)
        thread.start()
        send({"type": "session_start", "session_id": session_id, "profile": profile})
        try:
            while not done.wait(0.3):
                text = input("you> ").strip()
                if done.is_set():
                    break
                if not text:
                    continue
                send({"type": "user_message", "session_id": session_id, "text": text})
        except (EOFError, KeyboardInterrupt):
            if not done.is_set():
                send({"type": "session_end", "session_id": session_id})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triagebot",
        description="Customer-support triage chatbot engine",
    )
    parser.add_argument("--artifacts", help=f"artifacts directory (or ${ENV_ARTIFACTS})")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-corpus", help="write the synthetic ticket corpus")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--size", type=int, default=5000)
    p.add_argument("--ambiguity-rate", type=float, default=0.3)
    p.set_defaults(func=cmd_generate_corpus)

    p = sub.add_parser("train-context", help="train the context gate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=12, help="hyperparameter search budget")
    p.set_defaults(func=cmd_train_context)

    p = sub.add_parser("train-reason", help="train the contact-reason fusion model")
    p.add_argument("--provider", choices=("bow", "file", "remote"), default="bow")
    p.add_argument("--head", choices=("mlp", "logistic"), default="mlp")
    p.add_argument("--hidden", type=int, nargs="*", default=[128])
    p.add_argument("--min-class-count", type=int, default=50)
    p.add_argument("--endpoint", help="remote provider URL")
    p.add_argument("--dimension", type=int, help="remote provider vector size")
    p.set_defaults(func=cmd_train_reason)

    p = sub.add_parser("calibrate", help="calibrate the auto-routing threshold")
    p.add_argument("--coverage", type=float, default=0.8)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="evaluate on the test split and write the report")
    p.add_argument("--report", action="store_true", help="print the text report")
    p.add_argument("--no-reference", action="store_true",
                   help="omit the production reference blocks from the report")
    p.add_argument("--rules", help="business rules YAML")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="serve the trained bot")
    p.add_argument("--stdio", action="store_true", help="line protocol on stdin/stdout")
    p.add_argument("--http", action="store_true", help="HTTP/WebSocket API instead of TCP")
    p.add_argument("--bind", help=f"host:port (or ${ENV_BIND}); default 127.0.0.1:7651")
    p.add_argument("--deterministic", action="store_true",
                   help="logical timestamps and pinned template variants")
    p.add_argument("--rules", help="business rules YAML")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("chat", help="interactive client for a running TCP server")
    p.add_argument("--connect", default="127.0.0.1:7651")
    p.add_argument("--profile", help="JSON file with the tabular profile")
    p.add_argument("--session-id")
    p.set_defaults(func=cmd_chat)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TriagebotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing artifact: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Bundled test-corpus graphs (small named graphs plus seeded random ones)."""

from __future__ import annotations

import importlib.resources

from .graphs import Graph, parse_graph

__all__ = ["corpus_names", "corpus_text", "load_corpus_graph"]

CORPUS_NAMES = (
    "k2", "p3", "p4", "k3", "c4", "c5", "c6", "c7", "k33",
    "star2", "star3", "star4", "star5",
) + tuple(f"rand{k}" for k in range(1, 11))


def corpus_names() -> tuple[str, ...]:
    return CORPUS_NAMES


def corpus_text(name: str) -> str:
    if name not in CORPUS_NAMES:
        raise KeyError(f"unknown corpus graph {name!r}; known: {CORPUS_NAMES}")
    return (
        importlib.resources.files("urnflow")
        .joinpath("data", f"{name}.edges")
        .read_text(encoding="utf-8")
    )


def load_corpus_graph(name: str) -> Graph:
    return parse_graph(corpus_text(name), name=name)

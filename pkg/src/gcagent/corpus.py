"""Seeded synthetic evaluation corpus.

Stands in for a real judged dataset in demos and fixtures: small, varied,
and byte-reproducible for a given (n, seed).
"""

from __future__ import annotations

import random

from .evaluation import EvalSample

_PERSONAS = [
    "A cheerful DJ who recommends songs and keeps the group's energy up.",
    "A patient homework helper who explains step by step without judgment.",
    "A dramatic storyteller who answers everything with a tiny tale.",
    "A no-nonsense fitness coach who keeps advice short and actionable.",
    "A cozy cooking enthusiast who suggests simple weeknight recipes.",
    "A trivia owl who loves odd facts and gentle puns.",
]

_OPENERS = [
    "hey everyone, what should we do tonight?",
    "can someone explain why the sky is blue?",
    "I need a song for a rainy afternoon",
    "what's a quick dinner with just eggs and rice?",
    "tell us something interesting!",
    "I'm bored, entertain me",
    "any tips for sleeping better?",
    "who wins: robots or dinosaurs?",
]

_FILLERS = [
    "lol good question",
    "I was wondering the same thing",
    "no idea, ask the bot",
    "haha classic",
    "someone @ the expert",
    "ooh I want to know too",
]

_REPLY_SHAPES = [
    "Great question! {point} Anyway, here's my take: {take}",
    "{take} Hope that helps!",
    "Ooh, {point} My answer: {take}",
    "Short version: {take}",
    "{point} So I'd say {take}",
]

_POINTS = [
    "this comes up all the time.",
    "I love talking about this.",
    "there's a fun twist to it.",
    "people always argue about this.",
]

_TAKES = [
    "go with the simplest option and see how it feels.",
    "a little curiosity goes a long way here.",
    "try it once, you'll know immediately.",
    "the classic choice is classic for a reason.",
    "mix two ideas and make it yours.",
]


def build_corpus(
    n: int, seed: int = 0, labels: tuple[str, str] = ("candidate", "baseline")
) -> list[EvalSample]:
    rng = random.Random(seed)
    samples: list[EvalSample] = []
    for _ in range(n):
        history_len = rng.randint(0, 4)
        history = tuple(
            (f"user{rng.randint(1, 4)}", rng.choice(_FILLERS))
            for _ in range(history_len)
        )
        responses = {
            label: rng.choice(_REPLY_SHAPES).format(
                point=rng.choice(_POINTS), take=rng.choice(_TAKES)
            )
            for label in labels
        }
        samples.append(
            EvalSample(
                role_configuration=rng.choice(_PERSONAS),
                history=history,
                latest_message=rng.choice(_OPENERS),
                responses=responses,
            )
        )
    return samples

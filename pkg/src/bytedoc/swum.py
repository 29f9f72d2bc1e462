"""Phrases from function names: segmentation, POS tags, syntax class, templates.

Identifier words are tagged from a small lexicon and then sorted into one of
four shapes, each with its own phrase template:

* SINV: ``is presale ready`` -> "Checks whether the presale is ready"
* FRAG: ``give block reward`` -> "Gives block reward"
* S:    ``owner withdraws`` -> "Owner withdraws"
* NP:   ``total supply`` -> "Gets total supply"

Anything else is UNKNOWN and yields :class:`PhraseUnavailable`.
"""

from __future__ import annotations

import gzip
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import wordninja

CAMEL = "camel"
PASCAL = "pascal"
SNAKE = "snake"
ZIPF = "zipf"

SINV = "SINV"
FRAG = "FRAG"
S = "S"
NP = "NP"
UNKNOWN = "UNKNOWN"

NOMINAL = {"NN", "NNS", "NP", "ADJP", "VBN", "VBG", "CD"}
ADJ_SUFFIXES = ("able", "ible", "ous", "ive", "ful", "less")

_CAMEL_PART = re.compile(r"[A-Z]+(?![a-z])|[A-Z]?[a-z]+|\d+")


class PhraseUnavailable(Exception):
    pass


@dataclass(frozen=True)
class SegmentedName:
    words: tuple[str, ...]
    convention: str
    parts: tuple[str, ...] = ()  # original-case pieces, camel/pascal/snake only
    unknown_word: bool = False


@dataclass(frozen=True)
class TaggedSignature:
    words: tuple[str, ...]
    tags: tuple[str, ...]
    syntax_class: str = UNKNOWN


def _data(name: str):
    return resources.files("bytedoc") / "data" / name


@lru_cache(maxsize=1)
def _word_model() -> tuple[wordninja.LanguageModel, frozenset[str]]:
    path = _data("words.txt.gz")
    with resources.as_file(path) as p:
        model = wordninja.LanguageModel(str(p))
    with resources.as_file(path) as p, gzip.open(p, "rt") as f:
        words = frozenset(f.read().split())
    return model, words


def known_words() -> frozenset[str]:
    return _word_model()[1]


@lru_cache(maxsize=1)
def lexicon() -> dict[str, str]:
    table: dict[str, str] = {}
    tag = None
    for line in _data("lexicon.txt").read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            tag = line.strip("[]")
            continue
        for w in line.split():
            table.setdefault(w, tag)
    return table


@lru_cache(maxsize=1)
def phrase_tables() -> dict:
    return json.loads(_data("phrase_tables.json").read_text())


# ---------------------------------------------------------------------------
# segmentation


def _is_known(token: str) -> bool:
    if token.isdigit() or token in known_words() or token in lexicon():
        return True
    # inflected forms of lexicon verbs (withdraws, staked, voting)
    lex = lexicon()
    for suffix, stems in (("es", ("",)), ("s", ("",)), ("ed", ("", "e")), ("ing", ("", "e"))):
        if token.endswith(suffix):
            root = token[: -len(suffix)]
            if any(lex.get(root + s) == "VB" for s in stems):
                return True
    return False


def _zipf(token: str) -> tuple[list[str], bool]:
    model = _word_model()[0]
    pieces = [p.lower() for p in model.split(token)]
    if pieces and all(_is_known(p) for p in pieces):
        return pieces, False
    return [token.lower()], True


def segment(name: str) -> SegmentedName:
    core = name.strip("_")
    if not core or not re.fullmatch(r"[A-Za-z0-9_$]+", name):
        raise ValueError(f"not an identifier: {name!r}")
    if "_" in core:
        parts = [p for p in core.split("_") if p]
        convention = SNAKE
    else:
        parts = _CAMEL_PART.findall(core)
        if len(parts) == 1:
            convention = ZIPF
        else:
            convention = PASCAL if core[0].isupper() else CAMEL

    words: list[str] = []
    unknown = False
    fallback = convention == ZIPF
    for part in parts:
        low = part.lower()
        # an upper-case run inside a camel name is an acronym and kept as is
        acronym = convention in (CAMEL, PASCAL) and part.isupper() and len(part) > 1
        if _is_known(low) or acronym:
            words.append(low)
            continue
        fallback = True
        pieces, bad = _zipf(low)
        words.extend(pieces)
        unknown |= bad
    if fallback:
        return SegmentedName(tuple(words), ZIPF, (), unknown)
    return SegmentedName(tuple(words), convention, tuple(parts), False)


def join_words(seg: SegmentedName) -> str:
    """Rebuild the identifier from its pieces (camel/pascal/snake)."""
    if seg.convention == SNAKE:
        return "_".join(seg.parts)
    return "".join(seg.parts)


# ---------------------------------------------------------------------------
# tagging


def _word_tag(word: str) -> str:
    lex = lexicon()
    if word in lex:
        return lex[word]
    if word.isdigit():
        return "CD"
    if word.endswith("ed") and len(word) > 4:
        return "VBN"
    if word.endswith("ing") and len(word) > 5:
        return "VBG"
    if word.endswith(ADJ_SUFFIXES) and len(word) > 5:
        return "ADJP"
    if word.endswith("s") and len(word) > 3:
        stem = word[:-2] if word.endswith("es") and lex.get(word[:-2]) == "VB" else word[:-1]
        if lex.get(stem) == "VB":
            return "VBS"  # resolved by position below
        return "NNS"
    return "NN"


def pos_tag(words: tuple[str, ...] | list[str]) -> TaggedSignature:
    base = [_word_tag(w) for w in words]
    tags: list[str] = []
    for i, t in enumerate(base):
        prev = tags[-1] if tags else None
        if t == "VB" and i > 0:
            t = "NN"  # bare verb forms only lead imperatives
        elif t == "VBS":
            t = "VBZ" if prev in NOMINAL and "VBZ" not in tags else "NNS"
        tags.append(t)
    # nouns right after a leading VBZ form the inverted subject
    if tags and tags[0] == "VBZ":
        i = 1
        while i < len(tags) and tags[i] in ("NN", "NNS"):
            tags[i] = "NP"
            i += 1
    return TaggedSignature(tuple(words), tuple(tags))


def _nominal_run(words, tags, allow_of: bool = True) -> bool:
    if not tags or tags[0] == "IN" or tags[-1] == "IN":
        return False
    for w, t in zip(words, tags):
        if t == "IN" and allow_of and w == "of":
            continue
        if t not in NOMINAL:
            return False
    return True


def classify_syntax(tagged: TaggedSignature) -> str:
    w, t = tagged.words, tagged.tags
    if not t:
        return UNKNOWN
    if t[0] == "VBZ":
        if len(t) > 1 and t[1] == "NP" and (len(t) == 2 or _nominal_run(w[2:], t[2:])):
            return SINV
        return UNKNOWN
    if t[0] == "VB":
        return FRAG if len(t) > 1 and _nominal_run(w[1:], t[1:]) else UNKNOWN
    if "VBZ" in t:
        k = t.index("VBZ")
        subj_ok = _nominal_run(w[:k], t[:k])
        obj_ok = k == len(t) - 1 or _nominal_run(w[k + 1 :], t[k + 1 :])
        return S if subj_ok and obj_ok else UNKNOWN
    return NP if _nominal_run(w, t) else UNKNOWN


def tag_and_classify(words) -> TaggedSignature:
    tagged = pos_tag(words)
    return TaggedSignature(tagged.words, tagged.tags, classify_syntax(tagged))


# ---------------------------------------------------------------------------
# phrase construction


def third_person(verb: str) -> str:
    if verb.endswith(("s", "sh", "ch", "x", "z", "o")):
        return verb + "es"
    if len(verb) > 1 and verb.endswith("y") and verb[-2] not in "aeiou":
        return verb[:-1] + "ies"
    return verb + "s"


def select_verb(word: str | None) -> str:
    tables = phrase_tables()
    if word is None:
        return tables["default_np_verb"]
    return tables["verbs"].get(word) or third_person(word).capitalize()


def _slots(tagged: TaggedSignature) -> tuple[list[str], dict[str, str]]:
    """Collapse the tag sequence into template slots and their fillers."""
    w, t, cls = tagged.words, tagged.tags, tagged.syntax_class
    if cls == SINV:
        subj = [x for x, tag in zip(w[1:], t[1:]) if tag == "NP"]
        rest = list(zip(w[1 + len(subj) :], t[1 + len(subj) :]))
        slots = ["VBZ", "NP"]
        fill = {"VBZ": w[0], "NP": " ".join(subj)}
        if rest:
            # the final word is the complement, anything between modifies it
            slot = rest[-1][1] if rest[-1][1] in ("ADJP", "VBN", "VBG") else "ADJP"
            slots.append(slot)
            fill[slot] = " ".join(x for x, _ in rest)
        return slots, fill
    if cls == FRAG:
        return ["VB", "OBJ"], {"VB": w[0], "OBJ": " ".join(w[1:])}
    if cls == S:
        k = t.index("VBZ")
        slots, fill = ["SUBJ", "VBZ"], {"SUBJ": " ".join(w[:k]), "VBZ": w[k]}
        if k < len(w) - 1:
            slots.append("OBJ")
            fill["OBJ"] = " ".join(w[k + 1 :])
        return slots, fill
    return ["NP"], {"NP": " ".join(w)}


def _construct(tagged: TaggedSignature) -> str:
    slots, fill = _slots(tagged)
    for tpl in phrase_tables()["templates"].get(tagged.syntax_class, []):
        if tpl["tags"] != slots:
            continue
        if tagged.syntax_class in (SINV, FRAG):
            fill["verb"] = select_verb(tagged.words[0])
        elif tagged.syntax_class == NP:
            fill["verb"] = select_verb(None)
        text = tpl["text"].format(**fill)
        return text[0].upper() + text[1:]
    raise PhraseUnavailable(f"no {tagged.syntax_class} template for {' '.join(slots)}")


def function_name(text_sig: str) -> str:
    return text_sig.split("(", 1)[0].strip()


def analyze(text_sig: str) -> tuple[SegmentedName, TaggedSignature]:
    seg = segment(function_name(text_sig))
    return seg, tag_and_classify(seg.words)


def generate_phrase(text_sig: str) -> str:
    """Functionality phrase for ``text_sig`` built from its name alone."""
    try:
        seg, tagged = analyze(text_sig)
    except ValueError as exc:
        raise PhraseUnavailable(str(exc)) from None
    if seg.unknown_word:
        unknown = [w for w in seg.words if not _is_known(w)]
        raise PhraseUnavailable(f"unknown word(s) {', '.join(unknown)} in {text_sig}")
    if tagged.syntax_class == UNKNOWN:
        raise PhraseUnavailable(f"{text_sig} fits no syntax class (tags {' '.join(tagged.tags)})")
    return _construct(tagged)

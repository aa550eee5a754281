"""Relative presentations over a free product of a free group with the
peripheral subgroups, the two rewriting constructions for amalgams and HNN
extensions, and a capped brute-force isoperimetric table.

Words live over a two-sorted alphabet: plain letters from the generating
set, and peripheral letters, each an element of one peripheral subgroup
stored as a word of the ambient group.  Free reduction merges adjacent
letters of one peripheral through the subgroup's own multiplication, so
equality in the free product is decidable whenever the peripherals' ambient
groups have canonical forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import KLNotDistinct, SubPresentationUnverified
from .groups import Group
from .subgroups import Subgroup
from .words import Word


@dataclass(frozen=True)
class SToken:
    name: str
    sign: int

    def inverse(self):
        return SToken(self.name, -self.sign)

    def __str__(self):
        return self.name if self.sign > 0 else f"{self.name}^-1"


@dataclass(frozen=True)
class HToken:
    peripheral: str
    value: tuple  # letters of a word in the peripheral's ambient group

    def word(self) -> Word:
        return Word(self.value)

    def inverse(self):
        return HToken(self.peripheral, tuple(Word(self.value).inverse()))

    def __str__(self):
        return f"{self.peripheral}({Word(self.value)})"


class FPWord(tuple):
    """A word in the free product of the letter group with the peripherals."""

    __slots__ = ()

    def __new__(cls, tokens=()):
        return super().__new__(cls, tuple(tokens))

    def inverse(self) -> "FPWord":
        return FPWord(t.inverse() for t in reversed(self))

    def __mul__(self, other) -> "FPWord":
        return FPWord(tuple.__add__(self, other))

    def __str__(self):
        return " ".join(str(t) for t in self) if self else "1"


@dataclass
class RelPresentation:
    """letters + peripherals + relators presenting a group relative to the
    peripheral collection."""

    letters: tuple
    peripherals: dict          # label -> Subgroup handle
    relators: list             # of FPWord

    def normalize(self, word: FPWord) -> FPWord:
        """Free-product normal form: merge adjacent same-peripheral letters,
        drop identities, cancel adjacent inverse plain letters."""
        out = []
        for tok in word:
            cur = tok
            while True:
                if isinstance(cur, HToken):
                    handle = self.peripherals[cur.peripheral]
                    value = handle.ambient.normalize(cur.word())
                    if not value:
                        break
                    cur = HToken(cur.peripheral, tuple(value))
                    if out and isinstance(out[-1], HToken) \
                            and out[-1].peripheral == cur.peripheral:
                        prev = out.pop()
                        cur = HToken(cur.peripheral,
                                     tuple(Word(prev.value) * Word(cur.value)))
                        continue
                    out.append(cur)
                    break
                else:
                    if out and isinstance(out[-1], SToken) \
                            and out[-1].name == cur.name \
                            and out[-1].sign == -cur.sign:
                        out.pop()
                        break
                    out.append(cur)
                    break
        # cancellations may expose new adjacencies; iterate to a fixpoint
        result = FPWord(out)
        if result != word:
            return self.normalize(result)
        return result

    def is_trivial_in_free_product(self, word: FPWord) -> bool:
        return len(self.normalize(word)) == 0

    def parse(self, text: str) -> FPWord:
        """"b H(a a) b^-1" style: plain letters by name, peripheral letters
        as label(word)."""
        toks = []
        for chunk in text.split():
            if "(" in chunk:
                label, rest = chunk.split("(", 1)
                inner = rest.rstrip(")")
                toks.append(HToken(label, tuple(Word.parse(inner.replace("·", " ")))))
            elif "^-1" in chunk:
                toks.append(SToken(chunk[: -len("^-1")], -1))
            else:
                toks.append(SToken(chunk, 1))
        return FPWord(toks)

    def token_alphabet(self, h_ball: int):
        """Every letter with peripheral values drawn from handle balls."""
        letters = []
        for name in self.letters:
            letters.append(SToken(name, 1))
            letters.append(SToken(name, -1))
        for label, handle in self.peripherals.items():
            seen = set()
            for w in handle.ball(h_ball):
                if w and tuple(w) not in seen:
                    seen.add(tuple(w))
                    letters.append(HToken(label, tuple(w)))
        return letters


def evaluate(pres: RelPresentation, group: Group, word: FPWord,
             letter_map=None) -> Word:
    """Evaluate a free-product word in the presented group.

    Plain letters map through ``letter_map`` (by default to the same-named
    generator); peripheral letters evaluate to their stored words.
    """
    letter_map = letter_map or {}
    acc = Word()
    for tok in word:
        if isinstance(tok, SToken):
            img = Word.coerce(letter_map.get(tok.name, Word(((tok.name, 1),))))
            acc = acc * (img if tok.sign > 0 else img.inverse())
        else:
            acc = acc * Word(tok.value)
    return group.normalize(acc)


@dataclass
class RelatorReport:
    passed: bool
    failures: list


def verify_relators(pres: RelPresentation, group: Group,
                    letter_map=None) -> RelatorReport:
    """Soundness half: every relator evaluates to the identity."""
    failures = []
    for rel in pres.relators:
        value = evaluate(pres, group, rel, letter_map)
        if value:
            failures.append((rel, value))
    return RelatorReport(not failures, failures)


def absorb(pres: RelPresentation, sub_labels, sub_letters, sub_relators,
           target_label: str, target_handle: Subgroup,
           letter_images=None, verified=True) -> RelPresentation:
    """Collapse a sub-presentation into a single peripheral.

    The peripherals in ``sub_labels`` and the plain letters in
    ``sub_letters`` present the subgroup named ``target_label``; relators in
    ``sub_relators`` (indices) become redundant and are dropped, and every
    remaining relator is rewritten by retagging absorbed letters into the
    new peripheral.  ``letter_images`` supplies the value of each absorbed
    plain letter inside the target handle's ambient group.
    """
    if not verified:
        raise SubPresentationUnverified("sub-presentation not certified")
    sub_labels = set(sub_labels)
    sub_letters = set(sub_letters)
    letter_images = letter_images or {}
    for name in sub_letters:
        if name not in letter_images:
            raise SubPresentationUnverified(
                f"absorbed letter {name!r} needs an image in the subgroup")
    drop = set(sub_relators)

    peripherals = {lab: h for lab, h in pres.peripherals.items()
                   if lab not in sub_labels}
    peripherals[target_label] = target_handle
    letters = tuple(n for n in pres.letters if n not in sub_letters)

    def retag(tok):
        if isinstance(tok, SToken):
            if tok.name in sub_letters:
                img = Word.coerce(letter_images[tok.name])
                return HToken(target_label,
                              tuple(img if tok.sign > 0 else img.inverse()))
            return tok
        if tok.peripheral in sub_labels:
            return HToken(target_label, tok.value)
        return tok

    out = RelPresentation(letters, peripherals, [])
    relators = []
    for i, rel in enumerate(pres.relators):
        if i in drop:
            continue
        relators.append(out.normalize(FPWord(retag(t) for t in rel)))
    out.relators = relators
    return out


def amalgam_presentation(pres_left: RelPresentation, left_label: str,
                         pres_right: RelPresentation, right_label: str,
                         amalgam, join_handle: Subgroup,
                         join_label="KK") -> RelPresentation:
    """Presentation of an amalgamated product relative to the join of the
    two distinguished peripherals.

    The edge identifications present the join, so the combined relator list
    is exactly the union of the two inputs (their distinguished-peripheral
    letters retagged, with values re-read inside the amalgam).
    """
    letters = tuple(pres_left.letters) + tuple(pres_right.letters)
    combined = RelPresentation(
        letters,
        {**{f"L:{k}": v for k, v in pres_left.peripherals.items()},
         **{f"R:{k}": v for k, v in pres_right.peripherals.items()}},
        [],
    )

    def import_side(pres, prefix):
        out = []
        for rel in pres.relators:
            toks = []
            for t in rel:
                if isinstance(t, HToken):
                    toks.append(HToken(f"{prefix}:{t.peripheral}", t.value))
                else:
                    toks.append(t)
            out.append(FPWord(toks))
        return out

    combined.relators = import_side(pres_left, "L") + import_side(pres_right, "R")
    return absorb(
        combined,
        sub_labels=[f"L:{left_label}", f"R:{right_label}"],
        sub_letters=[],
        sub_relators=[],
        target_label=join_label,
        target_handle=join_handle,
    )


def hnn_presentation(pres: RelPresentation, k_label: str, l_label: str,
                     hnn, join_handle: Subgroup,
                     join_label="KtL") -> RelPresentation:
    """Presentation of an HNN extension relative to the join of the
    conjugated subgroup and the image.

    Every letter of the K-peripheral is rewritten as t^-1 (t k t^-1) t with
    the conjugate read inside the join; the relator count is unchanged.
    """
    if k_label == l_label:
        raise KLNotDistinct("the two distinguished peripherals must differ")
    t = hnn.stable
    stable_letter = SToken(t, 1)
    peripherals = dict(pres.peripherals)
    out = RelPresentation(tuple(pres.letters) + (t,), peripherals, [])

    def rewrite(tok):
        if isinstance(tok, HToken) and tok.peripheral == k_label:
            conj = hnn.normalize(Word(((t, 1),)) * Word(tok.value) * Word(((t, -1),)))
            return [stable_letter.inverse(),
                    HToken(k_label, tuple(conj)),
                    stable_letter]
        return [tok]

    rewritten = []
    for rel in pres.relators:
        toks = []
        for tok in rel:
            toks.extend(rewrite(tok))
        rewritten.append(FPWord(toks))
    out.relators = rewritten
    absorbed = absorb(
        out,
        sub_labels=[k_label, l_label],
        sub_letters=[],
        sub_relators=[],
        target_label=join_label,
        target_handle=join_handle,
    )
    assert len(absorbed.relators) == len(pres.relators)
    return absorbed


# -- brute-force isoperimetry ---------------------------------------------------


@dataclass
class DehnEntry:
    length: int
    value: int
    exact: bool
    capped_words: int = 0

    def flag(self):
        return "exact" if self.exact else "lower-bound"


@dataclass
class DehnTable:
    entries: list
    h_ball: int
    conjugator_cap: int
    fill_cap: int

    def value(self, n):
        return next(e.value for e in self.entries if e.length == n)


def dehn_bruteforce(pres: RelPresentation, group: Group, max_length: int,
                    *, fill_cap=3, conjugator_cap=3, h_ball=1,
                    letter_map=None) -> DehnTable:
    """Minimal relator-fill counts for every short trivial word.

    Words are enumerated over plain letters and peripheral letters from a
    generator ball (the declared ``h_ball``), and fillings multiply up to
    ``fill_cap`` conjugated relators (or inverses) with conjugators from the
    free-product ball of radius ``conjugator_cap``.  Entries where a cap
    bound the search are flagged per entry, never silently.
    """
    alphabet = pres.token_alphabet(h_ball)
    relator_pool = []
    for rel in pres.relators:
        nf = pres.normalize(rel)
        relator_pool.append(nf)
        relator_pool.append(nf.inverse())

    conjugators = [FPWord()]
    frontier = [FPWord()]
    seen = {FPWord()}
    for _ in range(conjugator_cap):
        nxt = []
        for c in frontier:
            for tok in alphabet:
                cand = pres.normalize(c * FPWord((tok,)))
                if cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        conjugators.extend(nxt)
        frontier = nxt
    pieces = []
    seen_pieces = set()
    for c in conjugators:
        for r in relator_pool:
            piece = pres.normalize(c.inverse() * r * c)
            if piece not in seen_pieces:
                seen_pieces.add(piece)
                pieces.append(piece)

    # minimal factor counts: tabulate products of at most two pieces, then
    # peel leading pieces off a query for the deeper fills
    table_depth = min(2, fill_cap)
    fills = {FPWord(): 0}
    frontier = [FPWord()]
    for depth in range(1, table_depth + 1):
        nxt = []
        for prod in frontier:
            for piece in pieces:
                cand = pres.normalize(prod * piece)
                if cand not in fills:
                    fills[cand] = depth
                    nxt.append(cand)
        frontier = nxt

    inverses = [p.inverse() for p in pieces]

    def min_fill(target):
        layer = {target}
        best = None
        for peeled in range(0, fill_cap - table_depth + 1):
            found = min((fills[w] + peeled for w in layer if w in fills),
                        default=None)
            if found is not None and (best is None or found < best):
                best = found
            if best is not None and best <= peeled + 1:
                break  # deeper peels cannot improve on this
            if peeled < fill_cap - table_depth:
                layer = {pres.normalize(inv * w)
                         for w in layer for inv in inverses}
        if best is not None and best <= fill_cap:
            return best
        return None

    entries = []
    best = 0
    for n in range(1, max_length + 1):
        capped = 0
        for combo in itertools.product(alphabet, repeat=n):
            word = FPWord(combo)
            if evaluate(pres, group, word, letter_map):
                continue  # not trivial in the group
            nf = pres.normalize(word)
            if not nf:
                continue  # already trivial in the free product: zero fills
            fill = min_fill(nf)
            if fill is None:
                capped += 1
            elif fill > best:
                best = fill
        entries.append(DehnEntry(n, best, exact=(capped == 0),
                                 capped_words=capped))
    return DehnTable(entries, h_ball, conjugator_cap, fill_cap)

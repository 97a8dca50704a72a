"""Deterministic rule-based linguistic annotator.

Per-token it assigns a coarse part-of-speech category, a fine-grained
tag, a dependency-style relation, and an entity type, using ordered
lexicon and suffix rules plus a shallow positional grammar. It exists to
make feature extraction reproducible anywhere with no model downloads;
heavier annotators can be swapped in behind the same ``annotate``
surface as long as they stay deterministic for a fixed version.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class TokenAnnotation:
    text: str
    coarse: str  # universal POS category
    fine: str    # fine-grained tag
    dep: str     # dependency relation
    ent: str     # entity type, "" when none


STOPWORDS = frozenset(
    """a an and are as at be by for from has have he her his i in is it its me my
    of on or our she so that the their them they this to was we were will with
    would you your""".split()
)

_PUNCT_FINE = {
    ".": ".", "!": ".", "?": ".", ",": ",", ";": ":", ":": ":",
    "(": "-LRB-", ")": "-RRB-", '"': "''", "'": "''", "`": "``",
    "$": "$", "#": "#", "-": "HYPH", "—": "HYPH", "–": "HYPH",
    "%": "NFP", "&": "CC", "/": "HYPH", "@": "ADD",
}

_DETERMINERS = frozenset("the a an this that these those each every some any no all both".split())
_PRONOUNS_SUBJ = frozenset("i you he she it we they who".split())
_PRONOUNS_OBJ = frozenset("me him us them himself herself itself themselves myself yourself".split())
_PRONOUNS_POSS = frozenset("my your his its our their".split())
# "her" is ambiguous; treat as possessive for determinism
_ADPOSITIONS = frozenset(
    """of in for with on at by from about into over after under between through
    during against within across along around upon toward behind beyond
    among per""".split()
)
_CCONJ = frozenset("and or but nor".split())
_SCONJ = frozenset("because although while if when since whether that unless".split())
_MODALS = frozenset("will would can could may might must shall should".split())
_BE_HAVE_DO = {
    "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD", "be": "VB",
    "been": "VBN", "being": "VBG", "am": "VBP", "has": "VBZ", "have": "VBP",
    "had": "VBD", "do": "VBP", "does": "VBZ", "did": "VBD",
}
_WH_ADV = frozenset("where why how".split())
_INTERJECTIONS = frozenset("oh wow hey hello dear congratulations".split())

_COMMON_ADJ = frozenset(
    """good great strong new old high low big small young best better excellent
    outstanding exceptional effective reliable dependable capable clear
    dedicated passionate enthusiastic responsible technical creative
    collaborative innovative strategic analytical professional hard late
    early long short""".split()
)
_COMMON_VERBS = frozenset(
    """lead leads led leading work works worked working make makes made take
    takes took taken run runs ran help helps helped helping manage manages
    managed mentor mentors mentored guide guides guided inspire inspires
    inspired motivate motivates motivated communicate communicates
    communicated collaborate collaborates collaborated organize organizes
    organized coordinate coordinates coordinated deliver delivers delivered
    drive drives drove driven solve solves solved create creates created
    design designs designed build builds built plan plans planned execute
    executes executed achieve achieves achieved listen listens listened
    adapt adapts adapted present presents presented write writes wrote
    written speak speaks spoke teach teaches taught train trains trained
    develop develops developed improve improves improved learn learns
    learned test tests tested question questions questioned connect
    connects connected support supports supported empower empowers
    empowered delegate delegates delegated recruit recruits recruited
    show shows showed says said see sees saw know knows knew think thinks
    thought get gets got go goes went come comes came want wants wanted
    ship ships shipped""".split()
)
_PERSON_NAMES = frozenset(
    """john mary david sarah michael ming james linda robert susan maria wei
    ahmed fatima chen lee smith johnson patel kumar garcia singh kim park
    ivan olga hans emma noah ava liam sofia lucas mia elena omar layla
    yuki hiro priya raj anita carlos rosa jane alice bob carol dan erin
    frank grace henry iris jack kate leo nina oscar paula quinn rose tom
    uma victor wendy xavier yara zoe""".split()
)
_GPE_NAMES = frozenset(
    """america india china japan germany france brazil canada mexico spain
    italy russia egypt kenya nigeria atlanta boston chicago london paris
    tokyo berlin madrid toronto sydney mumbai beijing seoul georgia
    texas california""".split()
)
_ORG_WORDS = frozenset(
    """university college institute school company corporation corp inc labs
    laboratory department committee association society foundation group
    team council agency bureau""".split()
)
_MONTHS_DAYS = frozenset(
    """january february march april may june july august september october
    november december monday tuesday wednesday thursday friday saturday
    sunday""".split()
)

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_DIGITS_RE = re.compile(r"^\d[\d.,]*$")
_TIME_RE = re.compile(r"^\d{1,2}(:\d{2})?(am|pm)$", re.IGNORECASE)

_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "ish", "ic", "al", "ary", "less")
_NOUN_SUFFIXES = (
    "ness", "ment", "tion", "sion", "ship", "ity", "ism", "ance", "ence",
    "hood", "ology", "ist", "ism", "ure", "age", "or", "er", "ism",
)


class RuleTagger:
    """The pinned reference annotator. Pure and shareable across workers."""

    version = "ruletag-1"
    shareable = True

    def annotate(self, text: str) -> list[TokenAnnotation]:
        tokens = _TOKEN_RE.findall(text)
        draft: list[dict] = []
        for i, tok in enumerate(tokens):
            coarse, fine, ent = self._lexical(tok, i, tokens)
            draft.append({"text": tok, "coarse": coarse, "fine": fine, "ent": ent})
        self._assign_deps(draft)
        return [
            TokenAnnotation(d["text"], d["coarse"], d["fine"], d["dep"], d["ent"])
            for d in draft
        ]

    # --- token-level rules ------------------------------------------------

    def _lexical(self, tok: str, index: int, tokens: list[str]) -> tuple[str, str, str]:
        low = tok.lower()

        if not any(ch.isalnum() for ch in tok):
            fine = _PUNCT_FINE.get(tok, "NFP")
            coarse = "SYM" if tok in "$#%&@+=€£" else "PUNCT"
            return coarse, fine, ""

        if _DIGITS_RE.match(tok):
            ent = "CARDINAL"
            if index + 1 < len(tokens) and tokens[index + 1] == "%":
                ent = "PERCENT"
            elif index > 0 and tokens[index - 1] == "$":
                ent = "MONEY"
            elif len(tok) == 4 and tok.isdigit() and 1900 <= int(tok) <= 2099:
                ent = "DATE"
            return "NUM", "CD", ent
        if _TIME_RE.match(low):
            return "NUM", "CD", "TIME"

        if low in _MONTHS_DAYS:
            return "PROPN", "NNP", "DATE"
        if low in _DETERMINERS:
            return "DET", "DT", ""
        if low in _PRONOUNS_SUBJ:
            return ("PRON", "WP", "") if low == "who" else ("PRON", "PRP", "")
        if low in _PRONOUNS_OBJ or low == "her":
            return ("PRON", "PRP$", "") if low in _PRONOUNS_POSS or low == "her" else ("PRON", "PRP", "")
        if low in _PRONOUNS_POSS:
            return "PRON", "PRP$", ""
        if low == "to":
            return "PART", "TO", ""
        if low == "not":
            return "PART", "RB", ""
        if low in _MODALS:
            return "AUX", "MD", ""
        if low in _BE_HAVE_DO:
            return "AUX", _BE_HAVE_DO[low], ""
        if low in _CCONJ:
            return "CCONJ", "CC", ""
        if low in _SCONJ:
            return "SCONJ", "IN", ""
        if low in _ADPOSITIONS:
            return "ADP", "IN", ""
        if low in _INTERJECTIONS:
            return "INTJ", "UH", ""
        if low in ("what", "which"):
            return "PRON", "WDT", ""
        if low in _WH_ADV:
            return "ADV", "WRB", ""

        # proper nouns: capitalized tokens that are not sentence-common words
        if tok[:1].isupper() and low not in _COMMON_VERBS and low not in _COMMON_ADJ:
            if index > 0 or low in _PERSON_NAMES or low in _GPE_NAMES or low in _ORG_WORDS:
                ent = ""
                if low in _PERSON_NAMES:
                    ent = "PERSON"
                elif low in _GPE_NAMES:
                    ent = "GPE"
                elif low in _ORG_WORDS or any(
                    t.lower() in _ORG_WORDS for t in tokens[index + 1:index + 2]
                ):
                    ent = "ORG"
                if index > 0:
                    fine = "NNPS" if low.endswith("s") and not low.endswith("ss") else "NNP"
                    return "PROPN", fine, ent
                if ent:
                    return "PROPN", "NNP", ent

        if low in _COMMON_ADJ:
            fine = "JJS" if low.endswith("est") or low == "best" else (
                "JJR" if low.endswith("er") and low != "better" or low == "better" else "JJ"
            )
            return "ADJ", fine, ""
        if low in _COMMON_VERBS:
            return "VERB", self._verb_fine(low), ""
        if low.endswith("ly") and len(low) > 3:
            return "ADV", "RB", ""
        if low.endswith("ing") and len(low) > 4:
            return "VERB", "VBG", ""
        if low.endswith("ed") and len(low) > 3:
            return "VERB", "VBD", ""
        for suffix in _ADJ_SUFFIXES:
            if low.endswith(suffix) and len(low) > len(suffix) + 2:
                return "ADJ", "JJ", ""
        for suffix in _NOUN_SUFFIXES:
            if low.endswith(suffix) and len(low) > len(suffix) + 2:
                if low.endswith("s") and suffix.endswith("s"):
                    break
                return "NOUN", "NN", ""
        if low.endswith("s") and not low.endswith("ss") and len(low) > 3:
            return "NOUN", "NNS", ""
        return "NOUN", "NN", ""

    @staticmethod
    def _verb_fine(low: str) -> str:
        if low.endswith("ing"):
            return "VBG"
        if low.endswith("ed"):
            return "VBD"
        if low.endswith("en") and low not in ("listen",):
            return "VBN"
        if low.endswith("s"):
            return "VBZ"
        return "VB"

    # --- shallow positional grammar ----------------------------------------

    def _assign_deps(self, draft: list[dict]) -> None:
        root_index = None
        for i, d in enumerate(draft):
            if d["coarse"] == "VERB":
                root_index = i
                break
        if root_index is None:
            for i, d in enumerate(draft):
                if d["coarse"] in ("NOUN", "PROPN", "PRON"):
                    root_index = i
                    break
        if root_index is None and draft:
            root_index = 0

        seen_obj = False
        for i, d in enumerate(draft):
            coarse = d["coarse"]
            if i == root_index:
                d["dep"] = "root"
                continue
            if coarse == "PUNCT" or coarse == "SYM":
                d["dep"] = "punct"
            elif coarse == "DET":
                d["dep"] = "det"
            elif coarse == "ADJ":
                d["dep"] = "amod"
            elif coarse == "ADV":
                d["dep"] = "advmod"
            elif coarse == "ADP":
                d["dep"] = "case"
            elif coarse == "CCONJ":
                d["dep"] = "cc"
            elif coarse == "SCONJ":
                d["dep"] = "mark"
            elif coarse == "NUM":
                d["dep"] = "nummod"
            elif coarse == "AUX":
                d["dep"] = "aux"
            elif coarse == "INTJ":
                d["dep"] = "discourse"
            elif coarse == "PART":
                d["dep"] = "mark" if d["fine"] == "TO" else "advmod"
            elif coarse == "VERB":
                d["dep"] = "xcomp" if i > root_index else "advcl"
            elif coarse in ("NOUN", "PROPN", "PRON"):
                if d["fine"] == "PRP$":
                    d["dep"] = "nmod"
                elif coarse == "PROPN" and i > 0 and draft[i - 1]["coarse"] == "PROPN":
                    d["dep"] = "flat"
                elif i + 1 < len(draft) and draft[i + 1]["coarse"] in ("NOUN", "PROPN"):
                    d["dep"] = "compound"
                elif i < root_index:
                    d["dep"] = "nsubj"
                elif not seen_obj:
                    d["dep"] = "obj"
                    seen_obj = True
                else:
                    d["dep"] = "obl"
            else:
                d["dep"] = "dep"

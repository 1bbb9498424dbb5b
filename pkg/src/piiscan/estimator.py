"""scikit-learn style facade over the detection pipeline.

``SensitiveTextDetector`` compiles its glossary on ``fit`` and maps
document collections to detection lists on ``transform`` (``predict``
gives per-document detection counts), so the scanner drops into
sklearn pipelines, cross-validation plumbing and anything else that
speaks the estimator protocol.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .glossary import Glossary, load_glossary, loads
from .ingestion import Locator, TextUnit
from .ner import NerPlugin
from .pipeline import CompiledGlossary, Detection, ScanOptions, compile_glossary, scan_unit


def _check_documents(X) -> list[str]:
    """Validate that X is an iterable of strings (one document each)."""
    if isinstance(X, (str, bytes)):
        raise TypeError("X must be an iterable of documents, not a single string")
    docs = list(X)
    for i, doc in enumerate(docs):
        if not isinstance(doc, str):
            raise TypeError(f"document {i} is {type(doc).__name__}, expected str")
    return docs


class SensitiveTextDetector(BaseEstimator, TransformerMixin):
    """Detect sensitive data in documents.

    Parameters
    ----------
    glossary : str | Path | Glossary
        Glossary YAML path, YAML text, or an already-loaded Glossary.
    threshold_override : float, optional
        Replace every pattern's threshold for this detector.
    ner_plugin : NerPlugin, optional
        Secondary-scan plugin merged into the regex results.
    reference_date : datetime.date, optional
        Clock injected into date validators (defaults to today at fit).
    lazy : bool
        Compile the DFA lazily instead of eagerly.

    Attributes
    ----------
    compiled_ : CompiledGlossary
        Automata and lookup tables built by ``fit``.
    n_patterns_ : int
        Number of glossary patterns.
    """

    def __init__(
        self,
        glossary: str | Path | Glossary | None = None,
        threshold_override: float | None = None,
        ner_plugin: NerPlugin | None = None,
        reference_date: dt.date | None = None,
        lazy: bool = False,
    ):
        self.glossary = glossary
        self.threshold_override = threshold_override
        self.ner_plugin = ner_plugin
        self.reference_date = reference_date
        self.lazy = lazy

    def _resolve_glossary(self) -> Glossary:
        if isinstance(self.glossary, Glossary):
            return self.glossary
        if self.glossary is None:
            raise ValueError("glossary parameter is required")
        text_or_path = str(self.glossary)
        if "\n" in text_or_path:
            return loads(text_or_path)
        return load_glossary(text_or_path)

    def fit(self, X=None, y=None) -> "SensitiveTextDetector":
        """Compile the glossary into scan automata. X is ignored (the
        detector is configured, not trained)."""
        glossary = self._resolve_glossary()
        self.compiled_: CompiledGlossary = compile_glossary(glossary, lazy=self.lazy)
        self.n_patterns_ = len(glossary.patterns)
        self._options = ScanOptions(
            threshold_override=self.threshold_override,
            ner_plugin=self.ner_plugin,
            reference_date=self.reference_date or dt.date.today(),
        )
        return self

    def transform(self, X) -> list[list[Detection]]:
        """Detections per document, in document order."""
        check_is_fitted(self, "compiled_")
        docs = _check_documents(X)
        out = []
        for i, doc in enumerate(docs):
            unit = TextUnit(source=Path(f"<doc:{i}>"), locator=Locator(kind="bytes", base=0), content=doc)
            detections, _counters, _diags = scan_unit(unit, self.compiled_, self._options)
            out.append(detections)
        return out

    def predict(self, X) -> np.ndarray:
        """Number of detections per document."""
        return np.array([len(dets) for dets in self.transform(X)], dtype=np.int64)

    def _more_tags(self):
        return {"X_types": ["string"], "requires_fit": True}

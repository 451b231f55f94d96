"""Cross-lingual annotation projection: align, project, repair, score and mix silver data."""

from .align import (Alignment, AlignmentLink, AlignScore, LexiconModel, Strength, emit_pharaoh,
                    parse_pharaoh, score_alignment, score_corpus, symmetrize, train_lexicon,
                    viterbi_align)
from .corpus import (ROOT, AnnotatedSentence, Argument, Bitext, EventStructure, Span, Token,
                     read_bio, read_bitext, read_conllu, read_events, write_bio, write_conllu,
                     write_events)
from .errors import ParseError, SilverError, ValidationError
from .evaluation import MetricReport, entity_f1, las_uas, pos_accuracy
from .project import (ProjectionPolicy, ProjectionReport, project_bio, project_events,
                      project_spans, project_tags, project_tree, repair_bio)
from .silver import (Corpus, LabelSource, MixSpec, SilverCorpus, assemble_projection,
                     assemble_self_training, corpus_stats, mix)

__version__ = "0.1.0"

__all__ = [
    "Alignment", "AlignmentLink", "AlignScore", "LexiconModel", "Strength", "emit_pharaoh",
    "parse_pharaoh", "score_alignment", "score_corpus", "symmetrize", "train_lexicon",
    "viterbi_align", "ROOT", "AnnotatedSentence", "Argument", "Bitext", "EventStructure",
    "Span", "Token", "read_bio", "read_bitext", "read_conllu", "read_events", "write_bio",
    "write_conllu", "write_events", "ParseError", "SilverError", "ValidationError",
    "MetricReport", "entity_f1", "las_uas", "pos_accuracy", "ProjectionPolicy",
    "ProjectionReport", "project_bio", "project_events", "project_spans", "project_tags",
    "project_tree", "repair_bio", "Corpus", "LabelSource", "MixSpec", "SilverCorpus",
    "assemble_projection", "assemble_self_training", "corpus_stats", "mix",
]

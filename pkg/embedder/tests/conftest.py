"""Shared fixtures: a tiny local checkpoint and a 20-report CSV."""

import contextlib
import csv

import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.normalizers import BertNormalizer
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import TemplateProcessing
from transformers import DistilBertConfig, DistilBertModel, PreTrainedTokenizerFast

ACCEPTANCE_RESULTS: list = []

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "hello", "world", "bug", "crash", "report", "memory", "overflow",
    "security", "login", "page", "null", "pointer", "the", "a", "is",
    "in", "on", "when", "user", "fails", "error", "stack", "trace",
    "##s", "##ing", "##ed", "0", "1", "2", ".", ",", "!", "?",
]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria (embedder)")
    for number, label, status in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number} [{status}] {label}")


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per criterion."""

    @contextlib.contextmanager
    def record(number: int, label: str):
        try:
            yield
        except BaseException:
            ACCEPTANCE_RESULTS.append((number, label, "FAIL"))
            print(f"[criterion {number}] FAIL {label}")
            raise
        ACCEPTANCE_RESULTS.append((number, label, "PASS"))
        print(f"[criterion {number}] PASS {label}")

    return record


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    """A 768-wide single-layer random encoder with a small wordpiece vocab."""
    path = tmp_path_factory.mktemp("ckpt")
    wordpiece = Tokenizer(
        WordPiece({t: i for i, t in enumerate(VOCAB)}, unk_token="[UNK]")
    )
    wordpiece.normalizer = BertNormalizer(lowercase=True)
    wordpiece.pre_tokenizer = BertPreTokenizer()
    wordpiece.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", VOCAB.index("[CLS]")), ("[SEP]", VOCAB.index("[SEP]"))],
    )
    PreTrainedTokenizerFast(
        tokenizer_object=wordpiece,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=512,
    ).save_pretrained(path)
    torch.manual_seed(0)
    config = DistilBertConfig(
        vocab_size=len(VOCAB),
        dim=768,
        n_layers=1,
        n_heads=2,
        hidden_dim=64,
        max_position_embeddings=512,
    )
    DistilBertModel(config).save_pretrained(path)
    return str(path)


FIXTURE_ROWS = [
    ("r01", "login page crash", "null pointer in the login page", 1),
    ("r02", "hello world", "the report is a hello", 0),
    ("r03", "", "memory overflow on login", 1),
    ("r04", "stack trace in report", "", 0),
    ("r05", "", "", 0),
    ("r06", "security bug, with a comma", "user fails, again", 1),
    ("r07", "line\nbreak", "description with\ntwo lines", 0),
    ("r08", "unknownword zzz qqq", "more unknownwords", 0),
    ("r09", "hello " * 600, "", 1),
    ("r10", "duplicate report", "same text", 0),
    ("r11", "duplicate report", "same text", 0),
    ("r12", "the user is on the page", "error when login fails", 1),
    ("r13", "overflow overflow overflow", "stack overflow crash", 1),
    ("r14", "a b c", "1 2 0", 0),
    ("r15", "pointer error", "null pointer crash trace", 1),
    ("r16", "quoted \"inner\" text", "has \"quotes\"", 0),
    ("r17", "trailing space ", " leading space", 0),
    ("r18", "security security", "security report", 1),
    ("r19", "when the user fails", "the page fails", 0),
    ("r20", "memory bug on page", "memory error trace", 1),
]


@pytest.fixture()
def reports_csv(tmp_path):
    path = tmp_path / "reports.csv"
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "summary", "description", "label"])
        writer.writerows(FIXTURE_ROWS)
    return path

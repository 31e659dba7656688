import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from varmark.corpus import synthesize  # noqa: E402
from varmark.lang import parse_function  # noqa: E402

# The running example: `dir` appears in three statements.
MKDIR = """\
public boolean makeDir(String path) {
    File dir = new File(path);
    if (!dir.exists()) {
        return dir.mkdirs();
    }
    return false;
}
"""

MINIMAL = "int f(){int a=0;return a;}"


@pytest.fixture(scope="session")
def mkdir_fn():
    return parse_function(MKDIR, fn_id="mkdir")


@pytest.fixture(scope="session")
def small_records():
    return synthesize(40, seed=3)


@pytest.fixture(scope="session")
def small_functions(small_records):
    return [parse_function(r["code"], fn_id=r["id"]) for r in small_records]


@pytest.fixture(scope="session")
def tiny_bundle(small_functions):
    """Untrained model with small dimensions over the small corpus."""
    from varmark.nn.model import ModelBundle, ModelConfig
    from varmark.vocab import build_vocabs

    cfg = ModelConfig(feature_dim=16, head_dim=16, decoder_hidden=16, classifier_hidden=16)
    return ModelBundle.create(cfg, build_vocabs(small_functions), seed=0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in mod.TITLES.items():
        if n in mod.RESULTS:
            ok, detail = mod.RESULTS[n]
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] C{n:02d} {title}: {detail}")
        else:
            terminalreporter.write_line(f"[----] C{n:02d} {title}: not run")

# %% [markdown]
# # Batch runs and manifests
#
# Every experiment is also available as a ``levelcross`` subcommand that
# writes CSV files plus a manifest with checksums.  Here the entry point is
# called in-process.

# %%
import tempfile
from pathlib import Path

from levelcross import cli

out = Path(tempfile.mkdtemp()) / "run"
cli.main(["compare", "--model", "rect", "--eps_max", "400", "--bins", "20", "--out", str(out)])
print((out / "summary.txt").read_text())
print((out / "manifest.txt").read_text())

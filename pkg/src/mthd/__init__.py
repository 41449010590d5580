"""Interactive, adaptive neural translation workbench for historical documents.

The package is organized in layers: ``numerics`` (dense tensors with
reverse-mode differentiation), ``textdata`` (vocabularies, corpora, the
synthetic old-spelling generator), ``seq2seq`` (the attention encoder-decoder),
``decoding`` (free and prefix-constrained beam search), ``adaptation``
(online learning and checkpoints), ``server`` (the JSON/HTTP service) and
``simulator`` (simulated-user evaluation). Hot numeric kernels live in the
optional compiled extension ``mthd._core``; a numpy fallback is selected at
import when the extension is unavailable.
"""

__version__ = "0.1.0"

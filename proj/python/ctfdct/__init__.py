"""Block-DCT beta features, GAN-specific frequency analysis and robustness attacks."""

from ._ctfdct import (
    Error,
    Model,
    amplify,
    apply_attack,
    attack_grid,
    block_dct,
    decode,
    evaluate,
    fourier_magnitude,
    gsf,
    image_betas,
    spectral_peak_ratio,
    synth_image,
    train_boosted,
    train_logistic,
    write_png,
    zigzag_index,
    zigzag_position,
)


def error_code(exc: Error) -> str:
    """Taxonomy code of a library error, e.g. "no-signal" or "format"."""
    return exc.args[0]


__all__ = [
    "Error",
    "Model",
    "amplify",
    "apply_attack",
    "attack_grid",
    "block_dct",
    "decode",
    "error_code",
    "evaluate",
    "fourier_magnitude",
    "gsf",
    "image_betas",
    "spectral_peak_ratio",
    "synth_image",
    "train_boosted",
    "train_logistic",
    "write_png",
    "zigzag_index",
    "zigzag_position",
]

import numpy as np

STAGES = {
    "waveform": 1,
    "reference": 2,
    "surveillance": 3,
    "measurements": 4,
    "solver": 5,
}


def derive_seed(seed: int, stage: str, *indices: int) -> int:
    """
    Derive an independent child seed for a pipeline stage.

    Examples
    --------
    >>> derive_seed(7, "waveform", 0) == derive_seed(7, "waveform", 0)
    True
    >>> derive_seed(7, "waveform", 0) == derive_seed(7, "waveform", 1)
    False
    """
    entropy = [int(seed), STAGES[stage], *map(int, indices)]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])

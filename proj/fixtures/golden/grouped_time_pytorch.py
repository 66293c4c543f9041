# case: conv2d-grouped-time@torch.nn.LazyConvTranspose2d
# target: torch.nn.LazyConvTranspose2d
# bugport-fingerprint: torch.nn.LazyConvTranspose2d#7bc9a9b935bc797b
import torch

__bugport_result = torch.nn.LazyConvTranspose2d(out_channels=2048, kernel_size=1, input=(2, 512, 8, 8))

# recipe baseline: wall-time-seconds, repetitions=5, warmup_runs=1
def __bugport_baseline():
    torch.nn.LazyConvTranspose2d(out_channels=2048, kernel_size=1)
    torch.nn.LazyConvTranspose2d(out_channels=2048, kernel_size=1)

# recipe subject: wall-time-seconds, repetitions=5, warmup_runs=1
def __bugport_subject():
    torch.nn.LazyConvTranspose2d(out_channels=2048, kernel_size=1, groups=2)

# expect performance: wall-time-seconds subject_exceeds_baseline margin=1

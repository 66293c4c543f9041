# case: fig5@torch.nn.LazyConv2d
# target: torch.nn.LazyConv2d
# bugport-fingerprint: torch.nn.LazyConv2d#d21e2453a10e7a3e
import torch

x = torch.randn(1, 512, 7, 7)
__bugport_result = torch.nn.LazyConv2d(out_channels=2048, kernel_size=1)

# expect status: hard-crash

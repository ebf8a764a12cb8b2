"""Cost-aware strategy auctions for heterogeneous agent pools.

Agents bid short strategic plans; bids are scored by a learned
cost-minus-value rule; agents cheaper than the provisional winner may
refine their bids against a memory of past auctions before the final
selection executes.  The package also ships the min-max weight tuner,
attribution and diagnostic analytics, a k-NN baseline router, and a
deterministic synthetic-agent simulator.
"""

__version__ = "0.1.0"

"""Domain mismatch estimation from reconstruction-quality histograms."""

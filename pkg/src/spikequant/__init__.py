"""Threshold-based spike encoding analysed as quantization in the Alexiewicz norm."""

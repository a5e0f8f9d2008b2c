"""Pseudo-spectral Ericksen-Leslie nematic liquid-crystal simulator."""

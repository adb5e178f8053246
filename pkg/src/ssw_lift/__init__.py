"""Shintani lifts of integral-weight modular symbols and their p-adic families."""


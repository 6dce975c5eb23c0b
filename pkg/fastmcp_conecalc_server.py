#!/usr/bin/env python3
"""
FastMCP ConeCalc Server - FastMCP tools for domain classification,
conformal transformations and the constraint algebra
"""

import logging
import os

from fastmcp import FastMCP

from cone_geometry import Dilatation, FourMomentum, Inversion, SpecialConformal, Translation, apply_4d, isomorphism_residual
from config import Config
from constraint_solver import ConstraintParams, charged_masses, fermion_alpha_branches
from domain_partition import classify, q5_squared
from errors import ConeCalcError

logging.basicConfig(level=Config.LOG_LEVEL)
logger = logging.getLogger(__name__)

# FastMCP server
mcp = FastMCP("ConeCalc Server")


def _transform(op: str, h0: float, h1: float, h2: float, h3: float, lam: float):
    h = FourMomentum(h0, h1, h2, h3)
    ops = {
        "translate": lambda: Translation(h),
        "special": lambda: SpecialConformal(h),
        "dilate": lambda: Dilatation(lam),
        "inversion": Inversion,
    }
    if op not in ops:
        raise ValueError(f"unknown transform '{op}', expected one of {', '.join(ops)}")
    return ops[op]()


@mcp.tool()
def classify_q2(q2: float, M: float = 1.0) -> str:
    """Domain (I-IV), hyperboloid and on-shell q5^2 of a squared four-momentum"""
    try:
        label = classify(q2, M)
        return f"q^2 = {q2}: domain {label}, hyperboloid {label.hyperboloid}, q5^2 = {q5_squared(label, q2, M)}"
    except (ConeCalcError, ValueError) as e:
        return f"Error: {e}"


@mcp.tool()
def transform(q0: float, q1: float, q2: float, q3: float, op: str,
              h0: float = 0.0, h1: float = 0.0, h2: float = 0.0, h3: float = 0.0,
              lam: float = 0.0, M: float = 1.0, kplus: float = 1.0) -> str:
    """Apply translate, special, dilate or inversion to q and report the cone isomorphism residual"""
    try:
        t = _transform(op, h0, h1, h2, h3, lam)
        q = FourMomentum(q0, q1, q2, q3)
        result = apply_4d(t, q, M)
        residual = isomorphism_residual(t, q, kplus, M)
        return f"{op}({q0}, {q1}, {q2}, {q3}) = {tuple(result.as_array().tolist())}, residual {residual:.3e}"
    except (ConeCalcError, ValueError) as e:
        return f"Error: {e}"


@mcp.tool()
def charged_mass_pair(alpha_plus: float, beta_plus: float, M: float = 1.0) -> str:
    """Masses m_+^2, m_-^2 generated by the charged linear constraint"""
    try:
        masses = charged_masses(ConstraintParams.charged(alpha_plus, beta_plus, M))
        state = "physical" if masses.physical else "unphysical"
        return f"m+^2 = {masses.m_plus2}, m-^2 = {masses.m_minus2} ({state})"
    except (ConeCalcError, ValueError) as e:
        return f"Error: {e}"


@mcp.tool()
def fermion_branches(m_plus: float, m_minus: float, M: float = 1.0) -> str:
    """Both alpha_+^2 branches reproducing fermion masses m_+, m_-"""
    try:
        upper, lower = fermion_alpha_branches(m_plus, m_minus, M)
        return f"alpha+^2 = {upper} or {lower}"
    except (ConeCalcError, ValueError) as e:
        return f"Error: {e}"


if __name__ == "__main__":
    port = int(os.getenv("CONECALC_MCP_PORT", "8009"))
    logger.info(f"🚀 Starting ConeCalc MCP server on port {port}")
    mcp.run(transport="sse", port=port, host="0.0.0.0")

"""Check the integral identities behind the estimators"""
import argparse
from typing import List, Optional

from loguru import logger

from pyseqpt.config import RunConfig
from pyseqpt.dao.results import write_records
from pyseqpt.model.designs import design_for_scheme, verify_design
from pyseqpt.model.oracle import BIPARTITE, IDENTITIES, check_identity, identity_name
from pyseqpt.model.structures import SCHEMES, IdentityReport
from pyseqpt.util import is_prime_power, prime_power_factors

USES_BIG_DIM = ("nonuniform2design", "eq12", "haar-correction")


def add_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments of the verify subcommand"""
    parser.add_argument("-d", "--dim", type=int, help="Dimension d of the system")
    parser.add_argument(
        "--identity",
        dest="identities",
        action="append",
        help=f"Identity to check, repeatable, or 'all' ({', '.join(IDENTITIES)})",
    )
    parser.add_argument("-t", "--trials", type=int, default=10, help="Random trials per identity")
    parser.add_argument(
        "--channel-pairs",
        dest="channel_pairs",
        type=int,
        default=3,
        help="Random index pairs per channel trial",
    )
    parser.add_argument(
        "-D", "--big-dim", dest="big_dim", type=int, help="Embedding dimension (projected design)"
    )
    parser.add_argument("-s", "--scheme", type=str, choices=SCHEMES, help="Scheme of --design")
    parser.add_argument(
        "--design",
        dest="check_design",
        action="store_true",
        help="Also check the 2-design property of the scheme's input design",
    )


def main(config: RunConfig) -> int:
    """Write the report table, exit code 1 when an identity fails"""
    logger.debug("Dimension      : {}", config.dim)
    logger.debug("Identities     : {}", ", ".join(config.identities) or "all")
    logger.debug("Trials         : {}", config.trials)

    reports = run_verify(
        config.dim,
        config.identities,
        trials=config.trials,
        seed=config.seed,
        big_dim=config.big_dim,
        pairs=config.channel_pairs,
        n_jobs=config.n_jobs,
    )
    if config.check_design:
        design = design_for_scheme(config.scheme, config.dim, config.big_dim)
        reports.append(verify_design(design, trials=config.trials, seed=config.seed))

    write_records([r.to_record() for r in reports], config.out, config.fmt)
    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.error("Failed identities: {}", ", ".join(failed))
        return 1
    return 0


def applicable_identities(d: int) -> List[str]:
    """Identities defined in dimension d"""
    n_factors = len(prime_power_factors(d))
    names = []
    for name in IDENTITIES:
        if name == "eq3" and not is_prime_power(d):
            continue
        if name in BIPARTITE and n_factors != 2:
            continue
        if name == "appendixA-F1" and n_factors < 2:
            continue
        names.append(name)
    return names


def run_verify(
    d: int,
    identities: Optional[List[str]] = None,
    trials: int = 10,
    seed: int = 0,
    big_dim: Optional[int] = None,
    pairs: int = 3,
    n_jobs: Optional[int] = None,
) -> List[IdentityReport]:
    """
    Check the named identities, or every identity defined in dimension d for 'all'.

    big_dim is only passed to identities that use an embedding dimension.
    """
    if not identities or "all" in identities:
        names = applicable_identities(d)
    else:
        names = [identity_name(name) for name in identities]

    reports = []
    for name in names:
        report = check_identity(
            name,
            d,
            trials=trials,
            seed=seed,
            big_dim=big_dim if name in USES_BIG_DIM else None,
            pairs=pairs,
            n_jobs=n_jobs,
        )
        logger.info("{:<18} {}", name, "pass" if report.passed else "FAIL")
        reports.append(report)
    return reports

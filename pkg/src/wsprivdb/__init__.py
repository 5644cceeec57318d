"""Location-private spectrum availability queries over a compact filter digest."""

from .cuckoo import (
    CuckooFilter,
    FilterFormatError,
    FilterParams,
    SecretKey,
    derive_params,
    deserialize,
    fingerprint_of,
    hmac_probe,
    keyed_insert,
)
from .protocols import (
    CapacityError,
    DbServer,
    Decision,
    FilterConfig,
    ObservationLedger,
    PartyId,
    ProtocolOrderError,
    ProtocolRun,
    RunStats,
    SensingOracle,
    assert_privacy,
    key_exchange,
    run_lpdb,
    run_lpdb_leakage,
    run_lpdbqs,
)
from .scenario import Scenario, parse_scenario
from .spectrum import (
    DbRow,
    DeviceCharacteristics,
    GridSpec,
    SpectrumDb,
    encode_entry,
    encode_query,
    enumerate_param_combinations,
    generate_ground_truth,
    retrieve,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CuckooFilter",
    "DbRow",
    "DbServer",
    "Decision",
    "DeviceCharacteristics",
    "FilterConfig",
    "FilterFormatError",
    "FilterParams",
    "GridSpec",
    "ObservationLedger",
    "PartyId",
    "ProtocolOrderError",
    "ProtocolRun",
    "RunStats",
    "Scenario",
    "SecretKey",
    "SensingOracle",
    "SpectrumDb",
    "assert_privacy",
    "derive_params",
    "deserialize",
    "encode_entry",
    "encode_query",
    "enumerate_param_combinations",
    "fingerprint_of",
    "generate_ground_truth",
    "hmac_probe",
    "key_exchange",
    "keyed_insert",
    "parse_scenario",
    "retrieve",
    "run_lpdb",
    "run_lpdb_leakage",
    "run_lpdbqs",
]

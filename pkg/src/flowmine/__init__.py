"""Process mining for TCP traffic.

flowmine converts packet captures into process-mining event logs (one
case per connection, one event per packet), discovers models with an
inductive miner and a fuzzy-style frequency miner, scores logs by
token-based replay fitness, and validates flows against reference TCP
transition matrices. The synthetic traffic generator makes the central
experiment reproducible without a capture: TCP-compliant anomalies
replay perfectly against models mined from normal traffic.
"""

from .conformance import (
    DEFAULT_SILENT_DEPTH,
    FitnessReport,
    ReplayCounts,
    fitness,
    fitness_table_csv,
    replay_trace,
)
from .dfg import (
    DFG,
    END,
    START,
    LogStats,
    build_dfg,
    dfg_from_traces,
    log_stats,
    subsample,
    transition_frequencies,
    transitions_csv,
)
from .errors import (
    BadMagic,
    CutMismatch,
    EmptyModel,
    FlowmineError,
    MalformedRow,
    NoSynFound,
    NotEnoughCases,
    TruncatedHeader,
    UnknownLabel,
    UnmappableClass,
)
from .estimators import FlowSessionizer, FuzzyMiner, InductiveMiner
from .experiment import ExperimentConfig, ReportBundle, load_log, run_experiment
from .flows import (
    EVENT_LOG_COLUMNS,
    SIDE_CLIENT,
    SIDE_SERVER,
    Case,
    Event,
    EventLog,
    IngestStats,
    assign_cases,
    build_event_log,
    event_class,
    filter_complete,
    label_sides,
    packets_to_event_log,
    read_event_log,
    write_event_log,
)
from .fuzzy import FuzzyAdmission, FuzzyModel, FuzzyParams, fuzzy_admits, mine_fuzzy
from .inductive import Cut, find_cut, mine_inductive, split_log
from .packets import (
    CaptureParse,
    PacketRecord,
    TableParse,
    TcpFlags,
    format_timestamp,
    parse_flag_string,
    parse_packet_table,
    parse_pcap,
    parse_timestamp,
    render_flag_string,
    write_pcap,
)
from .petri import PetriNet, is_workflow_net, reachable_markings, to_pnml, tree_to_petri
from .reference import (
    SCENARIOS,
    STAGE_CLOSING,
    STAGE_ESTABLISHED,
    STAGE_HANDSHAKE,
    AdjacencyMatrix,
    ComparisonTable,
    MatrixState,
    ScenarioTrace,
    ValidationResult,
    bishop_matrix,
    check_trace,
    classify_stage,
    map_event_to_state,
    rfc_strict_matrix,
    run_scenario_suite,
    stage_majority,
)
from .render import export_dot
from .synth import (
    ANOMALY_KINDS,
    CHATTYLIKE,
    FLOODLIKE,
    SCANLIKE,
    TrafficProfile,
    generate_anomalous_log,
    generate_normal_log,
    profile_with_seed,
)
from .trees import (
    Operator,
    ProcessTree,
    flower,
    tree_admits,
    tree_alphabet,
    tree_depth,
)

__version__ = "0.1.0"

__all__ = [
    "ANOMALY_KINDS",
    "AdjacencyMatrix",
    "BadMagic",
    "CHATTYLIKE",
    "CaptureParse",
    "Case",
    "ComparisonTable",
    "Cut",
    "CutMismatch",
    "DEFAULT_SILENT_DEPTH",
    "DFG",
    "END",
    "EVENT_LOG_COLUMNS",
    "EmptyModel",
    "Event",
    "EventLog",
    "ExperimentConfig",
    "FLOODLIKE",
    "FitnessReport",
    "FlowSessionizer",
    "FlowmineError",
    "FuzzyAdmission",
    "FuzzyMiner",
    "FuzzyModel",
    "FuzzyParams",
    "InductiveMiner",
    "IngestStats",
    "LogStats",
    "MalformedRow",
    "MatrixState",
    "NoSynFound",
    "NotEnoughCases",
    "Operator",
    "PacketRecord",
    "PetriNet",
    "ProcessTree",
    "ReplayCounts",
    "ReportBundle",
    "SCANLIKE",
    "SCENARIOS",
    "SIDE_CLIENT",
    "SIDE_SERVER",
    "STAGE_CLOSING",
    "STAGE_ESTABLISHED",
    "STAGE_HANDSHAKE",
    "START",
    "ScenarioTrace",
    "TableParse",
    "TcpFlags",
    "TrafficProfile",
    "TruncatedHeader",
    "UnknownLabel",
    "UnmappableClass",
    "ValidationResult",
    "assign_cases",
    "bishop_matrix",
    "build_dfg",
    "build_event_log",
    "check_trace",
    "classify_stage",
    "dfg_from_traces",
    "event_class",
    "export_dot",
    "filter_complete",
    "find_cut",
    "fitness",
    "fitness_table_csv",
    "flower",
    "format_timestamp",
    "fuzzy_admits",
    "generate_anomalous_log",
    "generate_normal_log",
    "is_workflow_net",
    "label_sides",
    "load_log",
    "log_stats",
    "map_event_to_state",
    "mine_fuzzy",
    "mine_inductive",
    "packets_to_event_log",
    "parse_flag_string",
    "parse_packet_table",
    "parse_pcap",
    "parse_timestamp",
    "profile_with_seed",
    "reachable_markings",
    "read_event_log",
    "render_flag_string",
    "replay_trace",
    "rfc_strict_matrix",
    "run_experiment",
    "run_scenario_suite",
    "split_log",
    "stage_majority",
    "subsample",
    "transition_frequencies",
    "transitions_csv",
    "tree_admits",
    "tree_alphabet",
    "tree_depth",
    "tree_to_petri",
    "write_event_log",
    "write_pcap",
]

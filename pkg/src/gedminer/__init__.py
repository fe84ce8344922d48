"""Discovery of graph entity dependencies in property graphs."""

from .community import CommunityAssignment, cpm_quality, detect_communities
from .cover import RankConfig, RankError, RuleGraph, find_cover, rank_ged, rank_report
from .depminer import (
    Ged,
    GedStats,
    LatticeNode,
    Literal,
    Partition,
    SchemaError,
    check_satisfaction,
    generate_level1,
    generate_next_level,
    is_trivial,
    mine_dependencies,
    partition_of,
    validate_dependencies,
)
from .discovery import DiscoveryConfig, DiscoveryError, DiscoveryReport, discover_from_graph, run_discovery
from .fixtures import running_example_graph, running_example_patterns
from .graph import (
    WILDCARD,
    DuplicateNodeError,
    GraphError,
    GraphFormatError,
    GraphPattern,
    NodeRecord,
    PatternError,
    PropertyGraph,
    ReferentialIntegrityError,
    filter_graph,
    labels_match,
    load_graph,
    load_graph_files,
    write_graph,
)
from .matcher import (
    ABSENT,
    Match,
    MatchTable,
    Preprocessing,
    build_pseudo_relation,
    find_matches,
    homomorphic_matches,
    isomorphic_matches,
)
from .patterns import (
    FrequentPatternSet,
    canonical_code,
    mine_frequent_patterns,
    mni_support,
    reduce_patterns,
    subgraph_isomorphisms,
)
from .rules_io import RuleParseError, parse_rules, serialize_rules

__version__ = "0.1.0"

"""Oracle-protocol engine and concrete equality-query protocols."""

from .engine import BOT, PartyView, ProtocolError, Query, Transcript, TranscriptEntry, run_parties
from .equality import eq_gt_protocol, gt_bound, naive_thd_protocol
from .threshold import (
    PartitionNotFound,
    ThresholdInstance,
    bounded_diameter_threshold,
    brute_threshold,
    check_partition,
    diameter_partition,
    threshold_distance,
)
from .tree import Leaf, Node, eval_protocol, flatten_protocol, protocol_matrix, random_tree, tree_height

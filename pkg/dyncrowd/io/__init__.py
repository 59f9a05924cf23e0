"""
dyncrowd I/O

MOT tracking files, centroid output, event logs, label files, reports and
configuration files.
"""

from .mot import (
    MotData,
    MotRecord,
    mot_text,
    parse_mot_line,
    read_mot,
    tracks_from_points,
    write_centroids,
    write_mot_points,
)
from .records import (
    NO_CLUSTERS,
    format_float,
    format_substitution,
    format_summary,
    read_config,
    read_events,
    read_yaml,
    write_columns,
    write_config,
    write_events,
    write_labels,
    write_report,
    write_yaml,
)

__all__ = [
    'MotData',
    'MotRecord',
    'NO_CLUSTERS',
    'format_float',
    'format_substitution',
    'format_summary',
    'mot_text',
    'parse_mot_line',
    'read_config',
    'read_events',
    'read_mot',
    'read_yaml',
    'tracks_from_points',
    'write_centroids',
    'write_columns',
    'write_config',
    'write_events',
    'write_labels',
    'write_mot_points',
    'write_report',
    'write_yaml',
]

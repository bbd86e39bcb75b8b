from .entry import PruneConfig, QueryResult, RepositoryEntry, TaskQuery
from .log import LogScan, RecordLog, decode_record, encode_record, read_index, write_index
from .records import EntryRecord, ReuseRecord, TombstoneRecord, parse_record
from .snapshot import AnchorFilter, EntryRef, RepositorySnapshot, RepositoryView
from .store import Repository

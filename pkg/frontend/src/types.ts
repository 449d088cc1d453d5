// Payload shapes of the /api/v1 surface. Field names and integer-millisecond
// timestamps mirror the server's canonical serialization.

export interface StatusResponse {
  height: number | null;
  last_block_time: number | null;
  node_count: number;
  msp_count: number;
  alert_counts: Record<string, number>;
}

export interface Issue {
  issue_id: string;
  title: string;
  priority: string;
  status: string;
  updated: number;
  description: string;
}

export interface Evidence {
  kind: string;
  ref: string;
  window: [number, number] | null;
}

export interface Alert {
  alert_id: string;
  raised_at: number;
  rule: string;
  threat_codes: string[];
  severity: string;
  summary: string;
  evidence: Evidence[];
}

export interface GraphNode {
  id: string;
  msp: string;
  kind: "PEER" | "ORDERER";
  local: boolean;
  border: boolean;
}

export interface GraphLink {
  source: string;
  target: string;
  current: number | null;
  baseline: number | null;
  deviation: number;
}

export interface NetworkPayload {
  generated_at: number;
  nodes: GraphNode[];
  links: GraphLink[];
}

export interface LogLine {
  timestamp: number;
  node: string;
  level: string;
  message: string;
}

export interface TxBucket {
  bucket_start: number;
  total: number;
  counts_by_msp: Record<string, number>;
  avg_size_by_msp: Record<string, number>;
}

export interface LatencyBucket {
  bucket_start: number;
  endorsement_duration: number | null;
  ordering_latency: number | null;
  validation_duration: number | null;
}

export interface ReadItem {
  key: string;
  version: [number, number];
}

export interface WriteItem {
  key: string;
  value_hash: string;
  is_delete: boolean;
}

export interface TxRow {
  tx_id: string;
  block_num: number;
  tx_index: number;
  timestamp: number;
  creator_msp: string;
  chaincode: string;
  tx_type: string;
  size_bytes: number;
  read_set: ReadItem[];
  write_set: WriteItem[];
  validation_code: string;
}

export interface TransactionsPayload {
  from_ms: number;
  to_ms: number;
  granularity: string;
  buckets: TxBucket[];
  latency: LatencyBucket[];
  rows: TxRow[];
  row_total: number;
  next_cursor: string | null;
}

export interface ScanSummary {
  report_id: string;
  scanned_at: number;
  finding_count: number;
  max_severity: string | null;
}

export interface ChaincodeSummary {
  name: string;
  latest: ScanSummary | null;
}

export interface Finding {
  rule: string;
  function: string;
  key_or_source: string;
  severity: string;
}

export interface ScanReport {
  report_id: string;
  chaincode: string;
  scanned_at: number;
  findings: Finding[];
}

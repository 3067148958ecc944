/**
 * Consumer trace view: loads a lot's chain-of-custody report and re-verifies
 * every merkle anchor client-side against block headers fetched from the
 * node, so a tampered report shows a red badge no matter what the node says.
 */

import type { ApiClient, TraceReportJson } from "../api.js";
import { verifyAnchor } from "../merkle.js";

export interface AnchorStatus {
  txId: string;
  blockHeight: number;
  verified: boolean;
}

export interface GroupPresence {
  origins: boolean;
  vehicles: boolean;
  processing: boolean;
  storage_conditions: boolean;
  expiry_time: boolean;
}

export interface TraceView {
  report: TraceReportJson;
  anchors: AnchorStatus[];
  allVerified: boolean;
  groups: GroupPresence;
  breachedStorage: boolean;
}

export function groupPresence(report: TraceReportJson): GroupPresence {
  return {
    origins: report.origins.length > 0,
    vehicles: report.vehicles.length > 0,
    processing: report.processing.some((p) => p["processing_temp"] !== null),
    storage_conditions: report.storage_conditions.some(
      (s) => s.min_temp !== null && s.max_temp !== null,
    ),
    expiry_time: report.expiry_time !== null,
  };
}

export class TraceExplorerModel {
  constructor(private api: ApiClient) {}

  async load(lotId: string): Promise<TraceView> {
    const report = await this.api.trace(lotId);
    return this.evaluate(report);
  }

  /** Verification is separated from fetching so tests can tamper first. */
  async evaluate(report: TraceReportJson): Promise<TraceView> {
    const heights = report.anchors.map((a) => a.block_height);
    const roots = await this.api.headerRootsForHeights(heights);
    const anchors: AnchorStatus[] = [];
    for (const anchor of report.anchors) {
      anchors.push({
        txId: anchor.tx_id,
        blockHeight: anchor.block_height,
        verified: await verifyAnchor(anchor, roots),
      });
    }
    return {
      report,
      anchors,
      allVerified: anchors.length > 0 && anchors.every((a) => a.verified),
      groups: groupPresence(report),
      breachedStorage: false,
    };
  }
}

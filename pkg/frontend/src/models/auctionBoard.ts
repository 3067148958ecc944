/**
 * Live auction board: open auctions with countdowns and best bids, plus bid
 * placement. Local checks (strict increase, deadline) mirror the chain rules
 * for fast feedback; the node remains the enforcer and its error codes are
 * surfaced verbatim when they disagree.
 */

import type { ApiClient, AuctionJson, SubmitResult } from "../api.js";
import type { SessionIdentity } from "../session.js";

export interface AuctionRow {
  auction: AuctionJson;
  secondsLeft: number;
  bestAmount: number | null;
  minNextBid: number;
  biddable: boolean;
}

export interface BidOutcome extends SubmitResult {
  local?: boolean; // rejected before submission by the board's own check
}

export class AuctionBoardModel {
  rows: AuctionRow[] = [];
  lastError = "";
  private clockSkew = 0; // server_time - local time at last refresh

  constructor(
    private api: ApiClient,
    private session: SessionIdentity | null = null,
  ) {}

  networkTime(): number {
    return Math.floor(Date.now() / 1000) + this.clockSkew;
  }

  async refresh(): Promise<AuctionRow[]> {
    const { auctions, server_time } = await this.api.auctions("open");
    this.clockSkew = server_time - Math.floor(Date.now() / 1000);
    const now = this.networkTime();
    this.rows = auctions.map((auction) => {
      const bestAmount = auction.best_bid?.amount ?? null;
      return {
        auction,
        secondsLeft: Math.max(0, auction.close_time - now),
        bestAmount,
        minNextBid: bestAmount !== null ? bestAmount + 1 : auction.reserve_price,
        biddable: now < auction.close_time && now >= auction.open_time,
      };
    });
    return this.rows;
  }

  row(auctionId: string): AuctionRow | undefined {
    return this.rows.find((r) => r.auction.auction_id === auctionId);
  }

  /** Mirror of the on-chain bid rules; returns an error code or null. */
  validateLocally(auctionId: string, amount: number): string | null {
    const row = this.row(auctionId);
    if (!row) return "UnknownAuction";
    if (!row.biddable || this.networkTime() >= row.auction.close_time) return "AuctionClosed";
    if (this.session && row.auction.seller === this.session.actorId) return "SelfBid";
    if (amount < row.auction.reserve_price) return "BidTooLow";
    if (row.bestAmount !== null && amount <= row.bestAmount) return "BidTooLow";
    return null;
  }

  async placeBid(auctionId: string, amount: number): Promise<BidOutcome> {
    if (!this.session) return { accepted: false, code: "NoSession", local: true };
    const localCode = this.validateLocally(auctionId, amount);
    if (localCode) {
      this.lastError = localCode;
      return { accepted: false, code: localCode, local: true };
    }
    const tx = await this.session.buildTransaction({
      kind: "place_bid",
      auction_id: auctionId,
      amount,
    });
    const result = await this.api.submit(tx);
    this.lastError = result.accepted ? "" : result.code ?? "";
    return result;
  }

  async closeAuction(auctionId: string): Promise<SubmitResult> {
    if (!this.session) return { accepted: false, code: "NoSession" };
    const tx = await this.session.buildTransaction({
      kind: "close_auction",
      auction_id: auctionId,
    });
    return this.api.submit(tx);
  }
}

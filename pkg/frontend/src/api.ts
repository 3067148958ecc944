/** Thin typed client over the node's /v1 endpoints (plain request/response). */

export interface HeaderJson {
  hash: string;
  version: number;
  prev_hash: string;
  merkle_root: string;
  timestamp: number;
  difficulty: number;
  nonce: number;
  tx_count: number;
}

export interface ChainHead {
  height: number;
  tip: HeaderJson;
  state_digest: string;
  server_time: number;
}

export interface BlockJson {
  height: number;
  header: HeaderJson;
  transactions: Record<string, unknown>[];
}

export interface BidJson {
  bidder: string;
  amount: number;
  time: number;
}

export interface AuctionJson {
  auction_id: string;
  lot_id: string;
  seller: string;
  seller_name: string;
  reserve_price: number;
  open_time: number;
  close_time: number;
  status: "open" | "closed" | "failed";
  bids: BidJson[];
  best_bid: { bidder: string; amount: number } | null;
  winner: { actor_id: string; price: number } | null;
  lot: { crop_type: string; quantity: number; processed: boolean };
}

export interface LotJson {
  lot_id: string;
  owner: string;
  crop_type: string;
  status: string;
  quantity: number;
  parent_lots: string[];
  expiry_time: number | null;
  [key: string]: unknown;
}

export interface ShipmentJson {
  shipment_id: string;
  lot_id: string;
  shipper: string;
  recipient: string;
  vehicle_id: string;
  cold_chain_max: number;
  contract_price: number;
  status: "in_transit" | "delivered" | "breached";
  delivered_time: number | null;
  waypoints: { lat: number; lon: number; time: number }[];
  temperature_log: { value: number; time: number }[];
  settlement: { payer: string; payee: string; gross: number; penalty: number; net: number } | null;
}

export interface DisputeJson {
  dispute_id: string;
  subject: string;
  raiser: string;
  respondent: string;
  claim: string;
  status: "open" | "resolved";
  ruled_against: string | null;
}

export interface ActorJson {
  actor_id: string;
  role: string;
  display_name: string;
  public_key: string;
  reputation: string;
}

export interface TraceReportJson {
  lot_id: string;
  origins: Record<string, unknown>[];
  custody: {
    lot_id: string;
    holder: string;
    holder_name: string;
    from_time: number;
    to_time: number;
    acquired_via: string;
  }[];
  processing: Record<string, unknown>[];
  storage_conditions: {
    min_temp: number | null;
    max_temp: number | null;
    mean_temp: number | null;
    [key: string]: unknown;
  }[];
  vehicles: string[];
  expiry_time: number | null;
  anchors: { tx_id: string; block_height: number; proof: { leaf: string; path: { sibling: string; side: "left" | "right" }[]; root: string } }[];
  as_of: number;
}

export interface SubmitResult {
  accepted: boolean;
  txId?: string;
  code?: string;
  detail?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail = "",
  ) {
    super(`${code} (${status}) ${detail}`.trim());
  }
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body?.error ?? "HttpError", body?.detail ?? "");
    }
    return body as T;
  }

  chainHead(): Promise<ChainHead> {
    return this.getJson("/v1/chain/head");
  }

  block(digest: string): Promise<BlockJson> {
    return this.getJson(`/v1/blocks/${digest}`);
  }

  lot(lotId: string): Promise<LotJson> {
    return this.getJson(`/v1/lots/${lotId}`);
  }

  trace(lotId: string): Promise<TraceReportJson> {
    return this.getJson(`/v1/lots/${lotId}/trace`);
  }

  async auctions(status = ""): Promise<{ auctions: AuctionJson[]; server_time: number }> {
    const query = status ? `?status=${status}` : "";
    return this.getJson(`/v1/auctions${query}`);
  }

  auction(auctionId: string): Promise<AuctionJson> {
    return this.getJson(`/v1/auctions/${auctionId}`);
  }

  shipment(shipmentId: string): Promise<ShipmentJson> {
    return this.getJson(`/v1/shipments/${shipmentId}`);
  }

  actor(actorId: string): Promise<ActorJson> {
    return this.getJson(`/v1/actors/${actorId}`);
  }

  async disputes(status = ""): Promise<DisputeJson[]> {
    const query = status ? `?status=${status}` : "";
    const body = await this.getJson<{ disputes: DisputeJson[] }>(`/v1/disputes${query}`);
    return body.disputes;
  }

  /** POST a signed transaction; surfaces the node's error code verbatim. */
  async submit(wireTx: Record<string, unknown>): Promise<SubmitResult> {
    const response = await fetch(`${this.baseUrl}/v1/transactions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(wireTx),
    });
    const body = await response.json();
    if (response.status === 202) {
      return { accepted: true, txId: body.tx_id };
    }
    return { accepted: false, code: body?.error ?? "HttpError", detail: body?.detail ?? "" };
  }

  /**
   * Headers for the given heights, collected by walking parent links back
   * from the tip — the API serves blocks by digest only.
   */
  async headerRootsForHeights(heights: Iterable<number>): Promise<Map<number, string>> {
    const wanted = new Set(heights);
    const roots = new Map<number, string>();
    if (wanted.size === 0) return roots;
    const head = await this.chainHead();
    let cursorDigest = head.tip.hash;
    let cursorHeight = head.height - 1;
    const lowest = Math.min(...wanted);
    while (cursorHeight >= lowest) {
      const block = await this.block(cursorDigest);
      if (wanted.has(cursorHeight)) {
        roots.set(cursorHeight, block.header.merkle_root);
      }
      if (cursorHeight === 0) break;
      cursorDigest = block.header.prev_hash;
      cursorHeight -= 1;
    }
    return roots;
  }
}

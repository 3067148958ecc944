/**
 * Canonical transaction encoding, mirrored byte for byte from the node:
 * big-endian fixed-width integers, 4-byte length prefixes for strings and
 * lists, 1-byte tags for variants. The tx id is the SHA-256 of
 * (kind tag || body bytes || signer id); the signature never enters it.
 *
 * Golden-tested against node-produced vectors for every transaction kind.
 */

import { concat, hexToBytes } from "./hex.js";

export const KIND_TAGS = {
  register_actor: 0,
  record_sensor_batch: 1,
  create_lot: 2,
  open_auction: 3,
  place_bid: 4,
  close_auction: 5,
  start_shipment: 6,
  record_telemetry: 7,
  confirm_delivery: 8,
  process_lot: 9,
  quality_check: 10,
  raise_dispute: 11,
  resolve_dispute: 12,
} as const;

export type TxKindName = keyof typeof KIND_TAGS;

export const ROLE_TAGS = {
  farmer: 0,
  processor: 1,
  distributor: 2,
  retailer: 3,
  consumer: 4,
  negotiator: 5,
} as const;

export type RoleName = keyof typeof ROLE_TAGS;

export const METRIC_TAGS = { humidity: 0, co2: 1, temperature: 2 } as const;
export type MetricName = keyof typeof METRIC_TAGS;

export const METRIC_UNITS: Record<MetricName, string> = {
  humidity: "centi_percent_rh",
  co2: "ppm",
  temperature: "centi_celsius",
};

export function u8(value: number): Uint8Array {
  if (!Number.isInteger(value) || value < 0 || value > 0xff) {
    throw new Error(`u8 out of range: ${value}`);
  }
  return Uint8Array.of(value);
}

export function u32(value: number): Uint8Array {
  if (!Number.isInteger(value) || value < 0 || value > 0xffffffff) {
    throw new Error(`u32 out of range: ${value}`);
  }
  const out = new Uint8Array(4);
  new DataView(out.buffer).setUint32(0, value);
  return out;
}

export function u64(value: number | bigint): Uint8Array {
  const big = BigInt(value);
  if (big < 0n || big > 0xffffffffffffffffn) {
    throw new Error(`u64 out of range: ${value}`);
  }
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigUint64(0, big);
  return out;
}

export function i32(value: number): Uint8Array {
  if (!Number.isInteger(value) || value < -(2 ** 31) || value > 2 ** 31 - 1) {
    throw new Error(`i32 out of range: ${value}`);
  }
  const out = new Uint8Array(4);
  new DataView(out.buffer).setInt32(0, value);
  return out;
}

export function i64(value: number | bigint): Uint8Array {
  const big = BigInt(value);
  if (big < -(2n ** 63n) || big > 2n ** 63n - 1n) {
    throw new Error(`i64 out of range: ${value}`);
  }
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigInt64(0, big);
  return out;
}

export function boolByte(value: boolean): Uint8Array {
  return Uint8Array.of(value ? 1 : 0);
}

export function lengthPrefixed(raw: Uint8Array): Uint8Array {
  return concat(u32(raw.length), raw);
}

export function utf8(value: string): Uint8Array {
  return lengthPrefixed(new TextEncoder().encode(value));
}

function digest32(hex: string, field: string): Uint8Array {
  const raw = hexToBytes(hex);
  if (raw.length !== 32) throw new Error(`${field} must be a 32-byte hex digest`);
  return raw;
}

// -- body value shapes (JSON wire form mirrors the node's renderings) --------

export interface SensorReadingValue {
  subject: string; // hex digest
  metric: MetricName;
  value: number;
  time: number;
  device_id: string;
}

export interface WaypointValue {
  lat: number;
  lon: number;
  time: number;
}

export interface LotOutputValue {
  product_type: string;
  quantity: number;
}

export type TxBodyValue =
  | { kind: "register_actor"; role: RoleName; display_name: string; public_key: string }
  | { kind: "record_sensor_batch"; lot_id: string; readings: SensorReadingValue[] }
  | {
      kind: "create_lot";
      crop_type: string;
      seed_variety: string;
      sown_weather_summary: string;
      quantity: number;
      harvest_time: number;
    }
  | {
      kind: "open_auction";
      lot_id: string;
      reserve_price: number;
      open_time: number;
      close_time: number;
    }
  | { kind: "place_bid"; auction_id: string; amount: number }
  | { kind: "close_auction"; auction_id: string }
  | {
      kind: "start_shipment";
      lot_id: string;
      recipient: string;
      vehicle_id: string;
      cold_chain_max: number;
      contract_price: number;
    }
  | {
      kind: "record_telemetry";
      shipment_id: string;
      waypoints: WaypointValue[];
      readings: SensorReadingValue[];
    }
  | { kind: "confirm_delivery"; shipment_id: string }
  | {
      kind: "process_lot";
      parent_lots: string[];
      outputs: LotOutputValue[];
      processing_temp: number;
      method: string;
    }
  | { kind: "quality_check"; lot_id: string; passed: boolean; notes: string }
  | { kind: "raise_dispute"; subject: string; respondent: string; claim: string }
  | { kind: "resolve_dispute"; dispute_id: string; ruled_against: string };

function encodeReading(reading: SensorReadingValue): Uint8Array {
  return concat(
    digest32(reading.subject, "subject"),
    u8(METRIC_TAGS[reading.metric]),
    i64(reading.value),
    u64(reading.time),
    utf8(reading.device_id),
  );
}

function encodeWaypoint(waypoint: WaypointValue): Uint8Array {
  return concat(i32(waypoint.lat), i32(waypoint.lon), u64(waypoint.time));
}

function encodeSeq<T>(items: T[], encode: (item: T) => Uint8Array): Uint8Array {
  return concat(u32(items.length), ...items.map(encode));
}

export function encodeBody(body: TxBodyValue): Uint8Array {
  switch (body.kind) {
    case "register_actor":
      return concat(u8(ROLE_TAGS[body.role]), utf8(body.display_name), lengthPrefixed(hexToBytes(body.public_key)));
    case "record_sensor_batch":
      return concat(digest32(body.lot_id, "lot_id"), encodeSeq(body.readings, encodeReading));
    case "create_lot":
      return concat(
        utf8(body.crop_type),
        utf8(body.seed_variety),
        utf8(body.sown_weather_summary),
        u64(body.quantity),
        u64(body.harvest_time),
      );
    case "open_auction":
      return concat(
        digest32(body.lot_id, "lot_id"),
        u64(body.reserve_price),
        u64(body.open_time),
        u64(body.close_time),
      );
    case "place_bid":
      return concat(digest32(body.auction_id, "auction_id"), u64(body.amount));
    case "close_auction":
      return digest32(body.auction_id, "auction_id");
    case "start_shipment":
      return concat(
        digest32(body.lot_id, "lot_id"),
        digest32(body.recipient, "recipient"),
        utf8(body.vehicle_id),
        i32(body.cold_chain_max),
        u64(body.contract_price),
      );
    case "record_telemetry":
      return concat(
        digest32(body.shipment_id, "shipment_id"),
        encodeSeq(body.waypoints, encodeWaypoint),
        encodeSeq(body.readings, encodeReading),
      );
    case "confirm_delivery":
      return digest32(body.shipment_id, "shipment_id");
    case "process_lot":
      return concat(
        encodeSeq(body.parent_lots, (p) => digest32(p, "parent_lot")),
        encodeSeq(body.outputs, (o) => concat(utf8(o.product_type), u64(o.quantity))),
        i32(body.processing_temp),
        utf8(body.method),
      );
    case "quality_check":
      return concat(digest32(body.lot_id, "lot_id"), boolByte(body.passed), utf8(body.notes));
    case "raise_dispute":
      return concat(
        digest32(body.subject, "subject"),
        digest32(body.respondent, "respondent"),
        utf8(body.claim),
      );
    case "resolve_dispute":
      return concat(
        digest32(body.dispute_id, "dispute_id"),
        digest32(body.ruled_against, "ruled_against"),
      );
  }
}

export function signedPreimage(body: TxBodyValue, signerId: string): Uint8Array {
  return concat(u8(KIND_TAGS[body.kind]), encodeBody(body), digest32(signerId, "signer"));
}

/** The JSON body record exactly as the node renders and accepts it. */
export function bodyJson(body: TxBodyValue): Record<string, unknown> {
  switch (body.kind) {
    case "register_actor":
      return { role: body.role, display_name: body.display_name, public_key: body.public_key };
    case "record_sensor_batch":
      return {
        lot_id: body.lot_id,
        readings: body.readings.map((r) => ({
          subject: r.subject,
          metric: r.metric,
          value: r.value,
          unit: METRIC_UNITS[r.metric],
          time: r.time,
          device_id: r.device_id,
        })),
      };
    case "create_lot":
      return {
        crop_type: body.crop_type,
        seed_variety: body.seed_variety,
        sown_weather_summary: body.sown_weather_summary,
        quantity: body.quantity,
        quantity_unit: "grams",
        harvest_time: body.harvest_time,
      };
    case "open_auction":
      return {
        lot_id: body.lot_id,
        reserve_price: body.reserve_price,
        open_time: body.open_time,
        close_time: body.close_time,
      };
    case "place_bid":
      return { auction_id: body.auction_id, amount: body.amount };
    case "close_auction":
      return { auction_id: body.auction_id };
    case "start_shipment":
      return {
        lot_id: body.lot_id,
        recipient: body.recipient,
        vehicle_id: body.vehicle_id,
        cold_chain_max: body.cold_chain_max,
        cold_chain_max_unit: "centi_celsius",
        contract_price: body.contract_price,
      };
    case "record_telemetry":
      return {
        shipment_id: body.shipment_id,
        waypoints: body.waypoints.map((w) => ({ lat: w.lat, lon: w.lon, time: w.time })),
        readings: body.readings.map((r) => ({
          subject: r.subject,
          metric: r.metric,
          value: r.value,
          unit: METRIC_UNITS[r.metric],
          time: r.time,
          device_id: r.device_id,
        })),
      };
    case "confirm_delivery":
      return { shipment_id: body.shipment_id };
    case "process_lot":
      return {
        parent_lots: body.parent_lots,
        outputs: body.outputs.map((o) => ({ product_type: o.product_type, quantity: o.quantity })),
        processing_temp: body.processing_temp,
        processing_temp_unit: "centi_celsius",
        method: body.method,
      };
    case "quality_check":
      return { lot_id: body.lot_id, passed: body.passed, notes: body.notes };
    case "raise_dispute":
      return { subject: body.subject, respondent: body.respondent, claim: body.claim };
    case "resolve_dispute":
      return { dispute_id: body.dispute_id, ruled_against: body.ruled_against };
  }
}

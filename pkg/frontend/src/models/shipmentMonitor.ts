/** Shipment telemetry view: temperature series with breach markers. */

import type { ApiClient, ShipmentJson } from "../api.js";
import type { SessionIdentity } from "../session.js";
import type { SubmitResult } from "../api.js";

export interface TemperaturePoint {
  time: number;
  value: number;
  breach: boolean;
}

export interface ShipmentView {
  shipment: ShipmentJson;
  series: TemperaturePoint[];
  breachCount: number;
  firstBreachTime: number | null;
}

export class ShipmentMonitorModel {
  constructor(
    private api: ApiClient,
    private session: SessionIdentity | null = null,
  ) {}

  async load(shipmentId: string): Promise<ShipmentView> {
    const shipment = await this.api.shipment(shipmentId);
    const series = shipment.temperature_log.map((r) => ({
      time: r.time,
      value: r.value,
      breach: r.value > shipment.cold_chain_max,
    }));
    const breaches = series.filter((p) => p.breach);
    return {
      shipment,
      series,
      breachCount: breaches.length,
      firstBreachTime: breaches.length ? breaches[0]!.time : null,
    };
  }

  /** Recipient-side delivery confirmation. */
  async confirmDelivery(shipmentId: string): Promise<SubmitResult> {
    if (!this.session) return { accepted: false, code: "NoSession" };
    const tx = await this.session.buildTransaction({
      kind: "confirm_delivery",
      shipment_id: shipmentId,
    });
    return this.api.submit(tx);
  }
}

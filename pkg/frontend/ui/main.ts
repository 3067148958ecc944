/**
 * Console shell: identity loading, tab navigation, 2-second polling.
 * All business rules live in the models; this file only renders.
 */

import { ApiClient } from "../src/api.js";
import { SessionIdentity, type KeyFile } from "../src/session.js";
import { AuctionBoardModel, type AuctionRow } from "../src/models/auctionBoard.js";
import { TraceExplorerModel, type TraceView } from "../src/models/traceExplorer.js";
import { ShipmentMonitorModel, type ShipmentView } from "../src/models/shipmentMonitor.js";
import { DisputeDeskModel } from "../src/models/disputeDesk.js";
import { ReputationProfileModel } from "../src/models/reputationProfile.js";
import { shortId } from "../src/hex.js";

const POLL_MS = 2000;
const params = new URLSearchParams(location.search);
const api = new ApiClient(params.get("node") ?? "http://127.0.0.1:8545");

let session: SessionIdentity | null = null;
let board = new AuctionBoardModel(api, session);
let disputes = new DisputeDeskModel(api, session);
let shipments = new ShipmentMonitorModel(api, session);
const traces = new TraceExplorerModel(api);
const reputation = new ReputationProfileModel(api);

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
};

function el(tag: string, attrs: Record<string, string> = {}, text = ""): HTMLElement {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function fmtTime(unix: number): string {
  return new Date(unix * 1000).toLocaleString();
}

function fmtTemp(centi: number | null): string {
  return centi === null ? "–" : `${(centi / 100).toFixed(2)} °C`;
}

function fmtMoney(minor: number): string {
  return (minor / 100).toFixed(2);
}

// -- layout -------------------------------------------------------------

const TABS = ["identity", "auctions", "trace", "shipments", "disputes", "actors"] as const;
type Tab = (typeof TABS)[number];

const tabsNav = $("#tabs");
const viewsRoot = $("#views");
const viewEls = new Map<Tab, HTMLElement>();

for (const tab of TABS) {
  const button = el("button", { "data-tab": tab }, tab);
  button.addEventListener("click", () => activate(tab));
  tabsNav.appendChild(button);
  const section = el("section", { class: "view", id: `view-${tab}` });
  viewsRoot.appendChild(section);
  viewEls.set(tab, section);
}

function activate(tab: Tab): void {
  for (const b of tabsNav.querySelectorAll("button")) {
    b.classList.toggle("active", b.getAttribute("data-tab") === tab);
  }
  for (const [name, section] of viewEls) {
    section.classList.toggle("active", name === tab);
  }
}

// -- identity view -------------------------------------------------------

function renderIdentity(): void {
  const root = viewEls.get("identity")!;
  root.replaceChildren();
  const card = el("div", { class: "card" });
  card.appendChild(el("h2", {}, "Load identity"));
  card.appendChild(
    el(
      "p",
      { class: "muted" },
      "Paste a key file produced by `agrichain keygen` or `agrichain demo seed`. " +
        "The key stays in this page; transactions are signed in the browser.",
    ),
  );
  const area = el("textarea", { rows: "7", style: "width:100%", placeholder: "{ …key file json… }" }) as HTMLTextAreaElement;
  const err = el("div", { class: "error" });
  const load = el("button", { class: "action" }, "Use identity") as HTMLButtonElement;
  load.addEventListener("click", async () => {
    try {
      const file = JSON.parse(area.value) as KeyFile;
      session = await SessionIdentity.fromKeyFile(file);
      board = new AuctionBoardModel(api, session);
      disputes = new DisputeDeskModel(api, session);
      shipments = new ShipmentMonitorModel(api, session);
      $("#session-label").textContent = `${session.displayName || session.role} (${session.role}) ${shortId(session.actorId)}`;
      err.textContent = "";
      activate("auctions");
      await refreshAuctions();
    } catch (e) {
      err.textContent = e instanceof Error ? e.message : String(e);
    }
  });
  card.append(area, el("div"), load, err);
  root.appendChild(card);
}

// -- auction board -------------------------------------------------------

async function refreshAuctions(): Promise<void> {
  const root = viewEls.get("auctions")!;
  try {
    const rows = await board.refresh();
    renderAuctionRows(root, rows);
  } catch (e) {
    root.replaceChildren(el("div", { class: "error" }, String(e)));
  }
}

function renderAuctionRows(root: HTMLElement, rows: AuctionRow[]): void {
  root.replaceChildren();
  root.appendChild(el("h2", {}, "Open auctions"));
  if (!rows.length) {
    root.appendChild(el("p", { class: "muted" }, "No open auctions right now."));
    return;
  }
  const table = el("table");
  const head = el("tr");
  for (const h of ["lot", "seller", "reserve", "best bid", "closes in", "bid"]) {
    head.appendChild(el("th", {}, h));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr");
    tr.appendChild(el("td", {}, `${row.auction.lot.crop_type} (${row.auction.lot.processed ? "processed" : "raw"})`));
    tr.appendChild(el("td", {}, row.auction.seller_name || shortId(row.auction.seller)));
    tr.appendChild(el("td", {}, fmtMoney(row.auction.reserve_price)));
    tr.appendChild(el("td", {}, row.bestAmount === null ? "–" : fmtMoney(row.bestAmount)));
    const countdown = el("td", {}, row.biddable ? `${row.secondsLeft}s` : "closed");
    tr.appendChild(countdown);

    const bidCell = el("td");
    const form = el("form", { class: "inline" }) as HTMLFormElement;
    const input = el("input", {
      type: "number",
      min: String(row.minNextBid),
      value: String(row.minNextBid),
      style: "width:8rem",
    }) as HTMLInputElement;
    const button = el("button", { class: "action" }, "bid") as HTMLButtonElement;
    button.disabled = !row.biddable || !session;
    const note = el("span", { class: "error" });
    form.append(input, button, note);
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const outcome = await board.placeBid(row.auction.auction_id, Number(input.value));
      note.textContent = outcome.accepted
        ? `accepted ${shortId(outcome.txId ?? "")}`
        : `${outcome.local ? "local: " : ""}${outcome.code}`;
      if (outcome.accepted) setTimeout(refreshAuctions, POLL_MS);
    });
    bidCell.appendChild(form);
    tr.appendChild(bidCell);
    table.appendChild(tr);
  }
  root.appendChild(table);
}

// -- trace explorer --------------------------------------------------------

function renderTrace(): void {
  const root = viewEls.get("trace")!;
  root.replaceChildren();
  root.appendChild(el("h2", {}, "Trace a lot"));
  const form = el("form", { class: "inline" }) as HTMLFormElement;
  const input = el("input", { style: "width:36rem", placeholder: "lot id (hex)" }) as HTMLInputElement;
  const go = el("button", { class: "action" }, "trace");
  const err = el("div", { class: "error" });
  const result = el("div");
  form.append(input, go, err);
  root.append(form, result);
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    err.textContent = "";
    result.replaceChildren(el("p", { class: "muted" }, "verifying…"));
    try {
      const view = await traces.load(input.value.trim());
      renderTraceView(result, view);
    } catch (e) {
      result.replaceChildren();
      err.textContent = e instanceof Error ? e.message : String(e);
    }
  });
}

function renderTraceView(root: HTMLElement, view: TraceView): void {
  root.replaceChildren();
  const badge = el(
    "span",
    { class: `pill ${view.allVerified ? "ok" : "bad"}` },
    view.allVerified ? "all anchors verified" : "verification FAILED",
  );
  root.appendChild(el("div", { class: "card" })).append(
    el("strong", {}, `lot ${shortId(view.report.lot_id)}`),
    document.createTextNode(" "),
    badge,
  );

  const origin = el("div", { class: "card" });
  origin.appendChild(el("h3", {}, "Farm origin"));
  for (const o of view.report.origins) {
    origin.appendChild(
      el(
        "p",
        {},
        `${o["farmer_name"] || shortId(String(o["farmer"]))} — ${o["crop_type"]}, seed ${o["seed_variety"]}, ` +
          `sown under "${o["sown_weather_summary"]}", harvested ${fmtTime(Number(o["harvest_time"]))}`,
      ),
    );
  }
  root.appendChild(origin);

  const custody = el("div", { class: "card" });
  custody.appendChild(el("h3", {}, "Custody timeline"));
  const list = el("ul", { class: "timeline" });
  for (const entry of view.report.custody) {
    list.appendChild(
      el(
        "li",
        {},
        `${entry.holder_name || shortId(entry.holder)} via ${entry.acquired_via} ` +
          `(${fmtTime(entry.from_time)} → ${fmtTime(entry.to_time)})`,
      ),
    );
  }
  custody.appendChild(list);
  root.appendChild(custody);

  const logistics = el("div", { class: "card" });
  logistics.appendChild(el("h3", {}, "Transport, processing, storage"));
  logistics.appendChild(el("p", {}, `Vehicles: ${view.report.vehicles.join(", ") || "–"}`));
  for (const p of view.report.processing) {
    logistics.appendChild(
      el(
        "p",
        {},
        `Processed by ${p["processor_name"] || shortId(String(p["processor"]))} at ${fmtTemp(Number(p["processing_temp"]))} ` +
          `(${p["method"]}), expires ${fmtTime(Number(p["expiry_time"]))}`,
      ),
    );
  }
  for (const s of view.report.storage_conditions) {
    if (s.min_temp === null) continue;
    logistics.appendChild(
      el(
        "p",
        {},
        `Storage ${fmtTime(Number(s["from_time"]))}: min ${fmtTemp(s.min_temp)} / max ${fmtTemp(s.max_temp)} / mean ${fmtTemp(s.mean_temp)}`,
      ),
    );
  }
  logistics.appendChild(
    el("p", {}, `Expiry: ${view.report.expiry_time === null ? "–" : fmtTime(view.report.expiry_time)}`),
  );
  root.appendChild(logistics);

  const anchors = el("div", { class: "card" });
  anchors.appendChild(el("h3", {}, "Event anchors"));
  const table = el("table");
  const head = el("tr");
  for (const h of ["transaction", "block", "proof"]) head.appendChild(el("th", {}, h));
  table.appendChild(head);
  for (const anchor of view.anchors) {
    const tr = el("tr");
    tr.appendChild(el("td", { class: "mono" }, shortId(anchor.txId)));
    tr.appendChild(el("td", {}, String(anchor.blockHeight)));
    tr.appendChild(el("td")).appendChild(
      el("span", { class: `pill ${anchor.verified ? "ok" : "bad"}` }, anchor.verified ? "verified" : "invalid"),
    );
    table.appendChild(tr);
  }
  anchors.appendChild(table);
  root.appendChild(anchors);
}

// -- shipment monitor -------------------------------------------------------

function renderShipments(): void {
  const root = viewEls.get("shipments")!;
  root.replaceChildren();
  root.appendChild(el("h2", {}, "Shipment monitor"));
  const form = el("form", { class: "inline" }) as HTMLFormElement;
  const input = el("input", { style: "width:36rem", placeholder: "shipment id (hex)" }) as HTMLInputElement;
  const go = el("button", { class: "action" }, "load");
  const err = el("div", { class: "error" });
  const result = el("div");
  form.append(input, go, err);
  root.append(form, result);
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      const view = await shipments.load(input.value.trim());
      renderShipmentView(result, view);
      err.textContent = "";
    } catch (e) {
      err.textContent = e instanceof Error ? e.message : String(e);
    }
  });
}

function renderShipmentView(root: HTMLElement, view: ShipmentView): void {
  root.replaceChildren();
  const card = el("div", { class: "card" });
  const s = view.shipment;
  card.appendChild(el("h3", {}, `Vehicle ${s.vehicle_id}`));
  card.appendChild(
    el("p", {}, `status ${s.status} — limit ${fmtTemp(s.cold_chain_max)} — price ${fmtMoney(s.contract_price)}`),
  );
  if (view.breachCount > 0) {
    card.appendChild(
      el("p", { class: "error" }, `${view.breachCount} breach sample(s); first at ${fmtTime(view.firstBreachTime!)}`),
    );
  }
  if (s.settlement) {
    card.appendChild(
      el("p", {}, `settlement: gross ${fmtMoney(s.settlement.gross)}, penalty ${fmtMoney(s.settlement.penalty)}, net ${fmtMoney(s.settlement.net)}`),
    );
  }
  card.appendChild(renderChart(view));
  root.appendChild(card);
}

function renderChart(view: ShipmentView): SVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("class", "chart");
  svg.setAttribute("viewBox", "0 0 600 180");
  const points = view.series;
  if (points.length === 0) return svg;
  const times = points.map((p) => p.time);
  const values = points.map((p) => p.value).concat(view.shipment.cold_chain_max);
  const tMin = Math.min(...times), tMax = Math.max(...times, tMin + 1);
  const vMin = Math.min(...values) - 50, vMax = Math.max(...values) + 50;
  const x = (t: number) => 10 + (580 * (t - tMin)) / (tMax - tMin);
  const y = (v: number) => 170 - (160 * (v - vMin)) / (vMax - vMin);

  const limit = document.createElementNS(svg.namespaceURI, "line");
  limit.setAttribute("x1", "10"); limit.setAttribute("x2", "590");
  limit.setAttribute("y1", String(y(view.shipment.cold_chain_max)));
  limit.setAttribute("y2", String(y(view.shipment.cold_chain_max)));
  limit.setAttribute("stroke", "#b23a2f"); limit.setAttribute("stroke-dasharray", "5,4");
  svg.appendChild(limit);

  const line = document.createElementNS(svg.namespaceURI, "polyline");
  line.setAttribute("points", points.map((p) => `${x(p.time)},${y(p.value)}`).join(" "));
  line.setAttribute("fill", "none"); line.setAttribute("stroke", "#2c7a4b"); line.setAttribute("stroke-width", "2");
  svg.appendChild(line);

  for (const p of points.filter((p) => p.breach)) {
    const dot = document.createElementNS(svg.namespaceURI, "circle");
    dot.setAttribute("cx", String(x(p.time))); dot.setAttribute("cy", String(y(p.value)));
    dot.setAttribute("r", "4"); dot.setAttribute("fill", "#b23a2f");
    svg.appendChild(dot);
  }
  return svg;
}

// -- dispute desk -------------------------------------------------------------

async function renderDisputes(): Promise<void> {
  const root = viewEls.get("disputes")!;
  root.replaceChildren();
  root.appendChild(el("h2", {}, "Dispute desk"));

  const raiseCard = el("div", { class: "card" });
  raiseCard.appendChild(el("h3", {}, "Raise a dispute"));
  const form = el("form", { class: "inline" }) as HTMLFormElement;
  const subject = el("input", { placeholder: "subject id (lot/shipment hex)", style: "width:20rem" }) as HTMLInputElement;
  const respondent = el("input", { placeholder: "respondent actor id", style: "width:20rem" }) as HTMLInputElement;
  const claim = el("input", { placeholder: "claim", style: "width:16rem" }) as HTMLInputElement;
  const submit = el("button", { class: "action" }, "raise");
  const note = el("span", { class: "error" });
  form.append(subject, respondent, claim, submit, note);
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const outcome = await disputes.raise(subject.value.trim(), respondent.value.trim(), claim.value);
    note.textContent = outcome.accepted ? "raised" : outcome.code ?? "";
    if (outcome.accepted) setTimeout(renderDisputes, POLL_MS);
  });
  raiseCard.appendChild(form);
  root.appendChild(raiseCard);

  const listCard = el("div", { class: "card" });
  listCard.appendChild(el("h3", {}, "Open disputes"));
  try {
    const open = await disputes.refresh();
    if (!open.length) listCard.appendChild(el("p", { class: "muted" }, "none"));
    for (const d of open) {
      const row = el("p");
      row.append(
        el("span", { class: "mono" }, shortId(d.dispute_id)),
        document.createTextNode(` ${d.claim} — raiser ${shortId(d.raiser)} vs ${shortId(d.respondent)} `),
      );
      if (disputes.canResolve) {
        for (const [label, target] of [["rule against raiser", d.raiser], ["rule against respondent", d.respondent]] as const) {
          const act = el("button", { class: "action" }, label);
          act.addEventListener("click", async () => {
            const outcome = await disputes.resolve(d.dispute_id, target);
            if (outcome.accepted) setTimeout(renderDisputes, POLL_MS);
          });
          row.append(document.createTextNode(" "), act);
        }
      }
      listCard.appendChild(row);
    }
  } catch (e) {
    listCard.appendChild(el("div", { class: "error" }, String(e)));
  }
  root.appendChild(listCard);
}

// -- actor profiles -----------------------------------------------------------

function renderActors(): void {
  const root = viewEls.get("actors")!;
  root.replaceChildren();
  root.appendChild(el("h2", {}, "Reputation profile"));
  const form = el("form", { class: "inline" }) as HTMLFormElement;
  const input = el("input", { style: "width:36rem", placeholder: "actor id (hex)" }) as HTMLInputElement;
  const go = el("button", { class: "action" }, "look up");
  const err = el("div", { class: "error" });
  const result = el("div", { class: "card" });
  form.append(input, go, err);
  root.append(form, result);
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      const view = await reputation.load(input.value.trim());
      result.replaceChildren(
        el("h3", {}, `${view.actor.display_name} (${view.actor.role})`),
        el("p", { class: "mono" }, view.actor.actor_id),
        el("p", {}, `reputation ${view.actor.reputation} `),
      );
      result.lastElementChild!.appendChild(
        el("span", { class: `pill ${view.band === "low" ? "bad" : view.band === "high" ? "ok" : ""}` }, view.band),
      );
      err.textContent = "";
    } catch (e) {
      err.textContent = e instanceof Error ? e.message : String(e);
    }
  });
}

// -- boot ---------------------------------------------------------------------

async function boot(): Promise<void> {
  renderIdentity();
  renderTrace();
  renderShipments();
  renderActors();
  await renderDisputes();
  activate("identity");
  try {
    const head = await api.chainHead();
    $("#chain-status").textContent = `height ${head.height} · ${shortId(head.tip.hash)}`;
  } catch {
    $("#chain-status").textContent = `node unreachable at ${api.baseUrl}`;
  }
  await refreshAuctions();
  setInterval(refreshAuctions, POLL_MS);
  setInterval(() => {
    const head = api.chainHead();
    head.then((h) => ($("#chain-status").textContent = `height ${h.height} · ${shortId(h.tip.hash)}`)).catch(() => {});
  }, POLL_MS);
}

void boot();

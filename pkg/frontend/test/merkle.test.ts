/** Proof folding must agree with the chain's merkle rules, vectors included. */

import { test } from "node:test";
import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { verifyAnchor, verifyProof, type MerkleProofJson } from "../src/merkle.js";

const fixturePath = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "test", "fixtures", "golden.json");

const golden = JSON.parse(readFileSync(fixturePath, "utf8")) as {
  merkle: { proof: MerkleProofJson; merkle_root: string; tx_id: string; block_tx_count: number };
};

test("node-produced proof verifies", async () => {
  assert.equal(golden.merkle.proof.root, golden.merkle.merkle_root);
  assert.ok(await verifyProof(golden.merkle.proof));
});

test("flipped sibling digest fails", async () => {
  const proof = structuredClone(golden.merkle.proof);
  const first = proof.path[0]!;
  first.sibling = (first.sibling[0] === "0" ? "1" : "0") + first.sibling.slice(1);
  assert.equal(await verifyProof(proof), false);
});

test("flipped leaf fails", async () => {
  const proof = structuredClone(golden.merkle.proof);
  proof.leaf = (proof.leaf[0] === "0" ? "1" : "0") + proof.leaf.slice(1);
  assert.equal(await verifyProof(proof), false);
});

test("anchor checks bind tx id, height, and header root", async () => {
  const anchor = {
    tx_id: golden.merkle.tx_id,
    block_height: 3,
    proof: golden.merkle.proof,
  };
  const roots = new Map([[3, golden.merkle.merkle_root]]);
  assert.ok(await verifyAnchor(anchor, roots));

  assert.equal(await verifyAnchor(anchor, new Map([[3, "00".repeat(32)]])), false);
  assert.equal(await verifyAnchor(anchor, new Map([[5, golden.merkle.merkle_root]])), false);
  const wrongTx = { ...anchor, tx_id: "ff" + anchor.tx_id.slice(2) };
  assert.equal(await verifyAnchor(wrongTx, roots), false);
});

/**
 * SHA-256 and Ed25519 via WebCrypto only — works in browsers and Node 20+.
 * Signing happens entirely client-side; private keys never leave the page.
 */

import { concat } from "./hex.js";

function subtle(): SubtleCrypto {
  const subtleCrypto = globalThis.crypto?.subtle;
  if (!subtleCrypto) throw new Error("WebCrypto unavailable in this runtime");
  return subtleCrypto;
}

function asArrayBuffer(data: Uint8Array): ArrayBuffer {
  if (data.byteOffset === 0 && data.byteLength === data.buffer.byteLength) {
    return data.buffer as ArrayBuffer;
  }
  return data.slice().buffer as ArrayBuffer;
}

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await subtle().digest("SHA-256", asArrayBuffer(data)));
}

// RFC 8410 PKCS#8 envelope for a raw 32-byte Ed25519 seed; WebCrypto only
// imports private keys in pkcs8 form.
const PKCS8_ED25519_PREFIX = Uint8Array.from([
  0x30, 0x2e, 0x02, 0x01, 0x00, 0x30, 0x05, 0x06, 0x03, 0x2b, 0x65, 0x70,
  0x04, 0x22, 0x04, 0x20,
]);

export async function importSigningKey(seed: Uint8Array): Promise<CryptoKey> {
  if (seed.length !== 32) throw new Error("Ed25519 seed must be 32 bytes");
  return subtle().importKey(
    "pkcs8",
    asArrayBuffer(concat(PKCS8_ED25519_PREFIX, seed)),
    { name: "Ed25519" },
    false,
    ["sign"],
  );
}

export async function importVerifyKey(publicKey: Uint8Array): Promise<CryptoKey> {
  if (publicKey.length !== 32) throw new Error("Ed25519 public key must be 32 bytes");
  return subtle().importKey("raw", asArrayBuffer(publicKey), { name: "Ed25519" }, false, [
    "verify",
  ]);
}

export async function sign(key: CryptoKey, message: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await subtle().sign("Ed25519", key, asArrayBuffer(message)));
}

export async function verify(
  publicKey: Uint8Array,
  signature: Uint8Array,
  message: Uint8Array,
): Promise<boolean> {
  try {
    const key = await importVerifyKey(publicKey);
    return await subtle().verify("Ed25519", key, asArrayBuffer(signature), asArrayBuffer(message));
  } catch {
    return false;
  }
}

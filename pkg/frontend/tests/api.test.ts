import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, type FetchLike } from "../src/api.js";
import { DashboardApp } from "../src/app.js";
import { fakeBackend, fakeRoot, fakeStorage } from "./helpers.js";

function deferredFetch() {
  const pending: { url: string; resolve: (payload: unknown) => void }[] = [];
  const fetchImpl: FetchLike = (url) =>
    new Promise((resolve) => {
      pending.push({
        url,
        resolve: (payload) => resolve({ ok: true, status: 200, json: () => Promise.resolve(payload) }),
      });
    });
  return { fetchImpl, pending };
}

describe("api client", () => {
  it("flags a response as stale when a newer request for the same view was issued", async () => {
    const { fetchImpl, pending } = deferredFetch();
    const api = new ApiClient("", fetchImpl);
    const first = api.topStories("en");
    const second = api.topStories("en");
    // the newer request resolves first; the older one must come back stale
    pending[1].resolve({ language: "en", items: [] });
    pending[0].resolve({ language: "en", items: [{ id: "old" }] });
    const secondResult = await second;
    const firstResult = await first;
    expect(secondResult.stale).toBe(false);
    expect(firstResult.stale).toBe(true);
  });

  it("keeps independent sequences per view key", async () => {
    const { fetchImpl, pending } = deferredFetch();
    const api = new ApiClient("", fetchImpl);
    const top = api.topStories("en");
    const alerts = api.alerts();
    pending[0].resolve({ language: "en", items: [] });
    pending[1].resolve({ clock: "", cells: [] });
    expect((await top).stale).toBe(false);
    expect((await alerts).stale).toBe(false);
  });

  it("raises ApiError with the status code on failures", async () => {
    const failing: FetchLike = () =>
      Promise.resolve({ ok: false, status: 409, json: () => Promise.resolve({}) });
    const api = new ApiClient("", failing);
    await expect(api.alerts()).rejects.toThrowError(ApiError);
    await expect(api.alerts()).rejects.toMatchObject({ status: 409 });
  });
});

describe("error banner behaviour", () => {
  it("a failed refresh shows the banner and keeps the last data", async () => {
    const backend = fakeBackend();
    let failNow = false;
    const flaky: FetchLike = (url, init) => {
      if (failNow) return Promise.resolve({ ok: false, status: 502, json: () => Promise.resolve({}) });
      return backend.fetch(url, init);
    };
    const root = fakeRoot();
    const app = new DashboardApp(new ApiClient("", flaky), root, fakeStorage());
    await app.refreshLiveData();
    expect(root.innerHTML).toContain("timeline");
    expect(root.innerHTML).not.toContain("banner error");

    failNow = true;
    await app.refreshLiveData();
    expect(root.innerHTML).toContain("showing last loaded data");
    expect(root.innerHTML).toContain("timeline"); // last data retained
  });
});

// View state: every selection either resolves against the API or is
// cleared with a visible notice. Views re-render purely from
// (API payloads, ViewState), so reloading reproduces the same screen.

import type { ChannelSet } from "./channels.js";

export type Route =
  | { view: "top" }
  | { view: "alerts" }
  | { view: "cluster"; clusterId: string }
  | { view: "entity"; entityId: number }
  | { view: "channels" }
  | { view: "map" };

export interface ViewState {
  route: Route;
  language: string;
  activeSet: ChannelSet | null;
  selectedChannel: string | null;
  selectedAlertIndex: number | null;
  timeCursor: string | null;
  notice: string | null;
  error: string | null;
}

export function initialState(language = "en"): ViewState {
  return {
    route: { view: "top" },
    language,
    activeSet: null,
    selectedChannel: null,
    selectedAlertIndex: null,
    timeCursor: null,
    notice: null,
    error: null,
  };
}

export function withRoute(state: ViewState, route: Route): ViewState {
  return { ...state, route, selectedAlertIndex: null, notice: null };
}

export function clearSelection(state: ViewState, notice: string): ViewState {
  return { ...state, route: { view: "top" }, selectedAlertIndex: null, notice };
}

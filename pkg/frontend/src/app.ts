// Application shell: routing, 60-second polling for live views, event
// delegation over data-action attributes, and the non-blocking error
// banner (failed refreshes keep the last loaded data on screen).

import { ApiClient } from "./api.js";
import {
  addChannel,
  type ChannelSet,
  facetToLeaf,
  loadChannelSets,
  saveChannelSets,
  type StorageLike,
} from "./channels.js";
import { errorBanner, renderArticleList } from "./render.js";
import { initialState, type Route, type ViewState, withRoute } from "./state.js";
import { alertBoardModel, drillDownExpr, renderAlertBoard, seriesSpan } from "./views/alerts.js";
import {
  type BuilderDraft,
  draftToExpr,
  renderBuilder,
  renderChannelSet,
  renderFacets,
} from "./views/channelBuilder.js";
import { renderEgoGraph, renderEntityPage } from "./views/entity.js";
import { renderMap } from "./views/mapview.js";
import { hoverTitle, renderTimeline, timelineModel } from "./views/timeline.js";
import type { AlertsPayload, EvaluatePayload, TopStoriesPayload } from "./types.js";

const POLL_INTERVAL_MS = 60_000;
const PROFILE = "default";

export class DashboardApp {
  state: ViewState;
  private topStories: TopStoriesPayload | null = null;
  private alerts: AlertsPayload | null = null;
  private lastEvaluation: EvaluatePayload | null = null;
  private draft: BuilderDraft = { combinator: "intersection", leaves: [{ kind: "category", value: "" }] };
  private draftErrors: { field: string; message: string }[] = [];
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: { innerHTML: string },
    private readonly storage: StorageLike,
    language = "en",
  ) {
    this.state = initialState(language);
    const sets = loadChannelSets(storage, PROFILE);
    this.state.activeSet = sets[0] ?? { name: "my channels", channels: [] };
  }

  start(): void {
    void this.refreshLiveData();
    this.pollTimer = setInterval(() => void this.refreshLiveData(), POLL_INTERVAL_MS);
  }

  stop(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
  }

  async refreshLiveData(): Promise<void> {
    try {
      const top = await this.api.topStories(this.state.language);
      if (!top.stale) this.topStories = top.data;
      const alerts = await this.api.alerts();
      if (!alerts.stale) this.alerts = alerts.data;
      this.state.error = null;
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  navigate(route: Route): void {
    this.state = withRoute(this.state, route);
    this.render();
  }

  // -- click handling (data-action attributes) --------------------------------

  async onAction(action: string, data: Record<string, string>): Promise<void> {
    switch (action) {
      case "open-cluster":
        this.navigate({ view: "cluster", clusterId: data.cluster });
        await this.renderClusterDetail(data.cluster);
        return;
      case "open-entity":
        this.navigate({ view: "entity", entityId: Number(data.id) });
        await this.renderEntity(Number(data.id));
        return;
      case "open-alert":
        await this.openAlertCell(Number(data.index));
        return;
      case "hover-bucket":
        if (this.topStories) {
          this.state.timeCursor = data.bucket;
          const title = hoverTitle(timelineModel(this.topStories), data.cluster, data.bucket);
          this.state.notice = title;
        }
        this.render();
        return;
      case "pin-facet":
        this.pinFacet(data.facet, data.bucket);
        return;
      case "drill-down-entity":
        await this.evaluateAndShow({ kind: "entity", value: Number(data.id) });
        return;
      default:
        return;
    }
  }

  private async renderClusterDetail(clusterId: string): Promise<void> {
    try {
      const detail = await this.api.clusterDetail(clusterId);
      if (detail.stale) return;
      this.root.innerHTML =
        errorBanner(this.state.error) +
        `<h2>${detail.data.medoid_title}</h2>` +
        renderArticleList(detail.data.articles);
    } catch (err) {
      this.state = { ...this.state, notice: `cluster ${clusterId} is gone`, error: String(err) };
      this.render();
    }
  }

  private async renderEntity(entityId: number): Promise<void> {
    try {
      const [page, graph] = await Promise.all([
        this.api.entityPage(entityId),
        this.api.egoGraph([entityId]),
      ]);
      if (page.stale || graph.stale) return;
      this.root.innerHTML =
        errorBanner(this.state.error) + renderEntityPage(page.data) + renderEgoGraph(graph.data);
    } catch (err) {
      this.state = { ...this.state, notice: `entity ${entityId} not found`, error: String(err) };
      this.render();
    }
  }

  private async openAlertCell(index: number): Promise<void> {
    if (!this.alerts) return;
    const model = alertBoardModel(this.alerts);
    const cell = model.cells[index];
    if (!cell) return;
    this.state.selectedAlertIndex = index;
    const span = seriesSpan(model);
    const [articles, series] = await Promise.all([
      this.api.evaluate(drillDownExpr(model, index)),
      this.api.series(cell.country, cell.category, span.start, span.end),
    ]);
    if (articles.stale || series.stale) return;
    this.lastEvaluation = articles.data;
    const seriesRows = series.data.points
      .map((p) => `<li>${p.bucket}: ${p.value}</li>`)
      .join("");
    this.root.innerHTML =
      errorBanner(this.state.error) +
      `<h2>${cell.country} · ${cell.category}</h2>` +
      `<ol class="cell-series">${seriesRows}</ol>` +
      renderArticleList(articles.data.articles) +
      renderFacets(articles.data);
  }

  async evaluateAndShow(expr: Parameters<ApiClient["evaluate"]>[0]): Promise<void> {
    const result = await this.api.evaluate(expr);
    if (result.stale) return;
    this.lastEvaluation = result.data;
    this.root.innerHTML =
      errorBanner(this.state.error) + renderArticleList(result.data.articles) + renderFacets(result.data);
  }

  pinFacet(facetKind: string, bucket: string): void {
    const expr = facetToLeaf(facetKind, facetKind === "entities" ? Number(bucket) : bucket);
    const name = `${facetKind}:${bucket}`;
    this.pinChannel(name, expr);
  }

  pinChannel(name: string, expr: Parameters<ApiClient["evaluate"]>[0]): void {
    if (!this.state.activeSet) return;
    this.state.activeSet = addChannel(this.state.activeSet, name, expr);
    this.persistSets();
    this.render();
  }

  pinDraft(name: string): void {
    const { expr, errors } = draftToExpr(this.draft);
    this.draftErrors = errors;
    if (expr) {
      this.pinChannel(name, expr);
    } else {
      this.render();
    }
  }

  private persistSets(): void {
    if (this.state.activeSet) {
      saveChannelSets(this.storage, PROFILE, [this.state.activeSet]);
    }
  }

  activeSet(): ChannelSet | null {
    return this.state.activeSet;
  }

  render(): void {
    const banner = errorBanner(this.state.error);
    const notice = this.state.notice ? `<p class="notice">${this.state.notice}</p>` : "";
    switch (this.state.route.view) {
      case "top":
        this.root.innerHTML =
          banner + notice + (this.topStories ? renderTimeline(timelineModel(this.topStories)) : "<p>Loading…</p>");
        return;
      case "alerts":
        this.root.innerHTML =
          banner + (this.alerts ? renderAlertBoard(alertBoardModel(this.alerts)) : "<p>Loading…</p>");
        return;
      case "channels":
        this.root.innerHTML =
          banner +
          renderChannelSet(this.state.activeSet, this.state.selectedChannel) +
          renderBuilder(this.draft, this.draftErrors) +
          (this.lastEvaluation ? renderFacets(this.lastEvaluation) : "");
        return;
      default:
        this.root.innerHTML = banner + notice;
    }
  }

  async showMap(): Promise<void> {
    const geo = await this.api.mapGeoJson();
    if (geo.stale) return;
    this.root.innerHTML = errorBanner(this.state.error) + renderMap(geo.data);
  }
}

// Orchestrates view state, server fetches and scene rebuilding. All
// grouping comes from the service; the controller only tracks which metas
// the analyst has ungrouped and re-fetches with the `expanded=` parameter.

import { ApiClient } from "./api.js";
import { buildScene, VersionMismatch, type Scene, type SceneMetrics, DEFAULT_METRICS } from "./scene.js";
import {
  initialViewState,
  withExpanded,
  withoutExpanded,
  withParams,
  withTimeFilter,
  type GroupingParams,
  type ViewState,
} from "./state.js";
import type { AccountDetail, LayoutDoc } from "./types.js";

export type Listener = () => void;

export class InvestigatorController {
  state: ViewState;
  layout: LayoutDoc | null = null;
  popover: AccountDetail | null = null;
  banner: string | null = null;

  private listeners: Listener[] = [];

  constructor(
    private readonly api: ApiClient,
    caseId: string,
    private readonly metrics: SceneMetrics = DEFAULT_METRICS,
  ) {
    this.state = initialViewState(caseId);
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  scene(): Scene | null {
    if (!this.layout) return null;
    return buildScene(this.layout, this.state, this.metrics);
  }

  async load(): Promise<void> {
    try {
      this.layout = await this.api.fetchLayout(
        this.state.caseId,
        this.state.params,
        [...this.state.expanded].sort(),
      );
      this.banner = null;
      if (this.layout.layout_version !== 1) {
        // surface the banner but keep the old scene out of the way
        throw new VersionMismatch(this.layout.layout_version);
      }
      // the expanded set stays as-is: a dissolved meta is absent from the
      // returned document's grouping, but its id remains valid for this
      // grouping config (param changes clear the set)
    } catch (error) {
      if (error instanceof VersionMismatch) {
        this.banner = error.message;
        this.layout = null;
      } else if ((error as Error).name === "AbortError") {
        return; // superseded by a newer request
      } else {
        this.banner = (error as Error).message;
      }
    }
    this.notify();
  }

  /**
   * Ungroup a meta-node. Expanding an already-expanded id is a no-op;
   * otherwise exactly one layout re-fetch carries the id in `expanded=`.
   * Returns whether a fetch happened.
   */
  async onMetaClick(metaId: string): Promise<boolean> {
    const next = withExpanded(this.state, metaId);
    if (next === this.state) return false;
    this.state = next;
    await this.load();
    return true;
  }

  /** Collapse a previously expanded meta (relayouts through the server). */
  async onMetaCollapse(metaId: string): Promise<boolean> {
    const next = withoutExpanded(this.state, metaId);
    if (next === this.state) return false;
    this.state = next;
    await this.load();
    return true;
  }

  /** Single nodes open the account-detail popover instead of expanding. */
  async onNodeClick(accountId: string): Promise<void> {
    try {
      this.popover = await this.api.fetchAccount(this.state.caseId, accountId);
    } catch (error) {
      this.banner = (error as Error).message;
    }
    this.notify();
  }

  closePopover(): void {
    this.popover = null;
    this.notify();
  }

  /** Scenario/threshold changes re-fetch the full layout and reset expansion. */
  async onParamsChange(params: GroupingParams): Promise<void> {
    this.state = withParams(this.state, params);
    await this.load();
  }

  /** Pure view concern: never re-fetches, only hides elements. */
  onTimeFilter(filter: readonly [number, number] | null): void {
    this.state = withTimeFilter(this.state, filter);
    this.notify();
  }

  async switchCase(caseId: string): Promise<void> {
    this.state = initialViewState(caseId, this.state.params);
    this.popover = null;
    await this.load();
  }
}

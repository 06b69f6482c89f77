// Bootstrap: toolbar, scene mounting, playback wiring. Configuration is a
// single api_base_url (window.MLTRACE_API_BASE or same-origin default).

import { ApiClient } from "./api.js";
import { InvestigatorController } from "./controller.js";
import { PlaybackDriver, playbackSequence, type PlaybackStep } from "./playback.js";
import { applyHighlight, renderScene } from "./render.js";
import type { GroupingParams } from "./state.js";

declare global {
  interface Window {
    MLTRACE_API_BASE?: string;
  }
}

const apiBaseUrl = window.MLTRACE_API_BASE ?? "http://127.0.0.1:7731";

function readParams(root: Document): GroupingParams {
  const scenario = (root.getElementById("scenario") as HTMLSelectElement).value as GroupingParams["scenario"];
  const threshold = Number((root.getElementById("threshold") as HTMLSelectElement).value);
  const windowHours = Number((root.getElementById("window") as HTMLSelectElement).value);
  const minAccounts = Number((root.getElementById("min-accounts") as HTMLInputElement).value) || 15;
  const excludeFraud = (root.getElementById("exclude-fraud") as HTMLInputElement).checked;
  const params: GroupingParams = { scenario, minAccounts, excludeFraudTxns: excludeFraud };
  if (scenario === "amount" || scenario === "combined") params.thresholdPct = threshold;
  if (scenario === "time") params.windowHours = windowHours;
  return params;
}

async function start(): Promise<void> {
  const api = new ApiClient({ apiBaseUrl });
  const svg = document.getElementById("graph") as unknown as SVGSVGElement;
  const banner = document.getElementById("banner") as HTMLDivElement;
  const popover = document.getElementById("popover") as HTMLDivElement;
  const tooltip = document.getElementById("tooltip") as HTMLDivElement;
  const caseSelect = document.getElementById("case") as HTMLSelectElement;

  const cases = await api.listCases();
  for (const summary of cases) {
    const option = document.createElement("option");
    option.value = summary.case_id;
    option.textContent = `${summary.case_id} (${summary.account_count} accounts)`;
    caseSelect.appendChild(option);
  }
  if (cases.length === 0) {
    banner.textContent = "no cases in the store; ingest one with the mltrace CLI";
    banner.style.display = "block";
    return;
  }

  const controller = new InvestigatorController(api, cases[0]!.case_id);
  let driver: PlaybackDriver | null = null;

  const onTick = (step: PlaybackStep | null): void => {
    applyHighlight(svg, step);
    const indicator = document.getElementById("play-position")!;
    indicator.textContent = step ? `${step.position + 1} / ${step.total}` : "";
  };

  controller.onChange(() => {
    banner.style.display = controller.banner ? "block" : "none";
    banner.textContent = controller.banner ?? "";
    const scene = controller.scene();
    if (scene) {
      renderScene(svg, scene, {
        onMetaClick: (metaId) => void controller.onMetaClick(metaId),
        onNodeClick: (accountId) => void controller.onNodeClick(accountId),
        onHover: (key, x, y, text) => {
          if (key) {
            tooltip.style.display = "block";
            tooltip.style.left = `${x + 20}px`;
            tooltip.style.top = `${y}px`;
            tooltip.textContent = text;
          } else {
            tooltip.style.display = "none";
          }
        },
      });
      driver?.reset();
      driver = controller.layout
        ? new PlaybackDriver(playbackSequence(controller.layout, controller.state), onTick)
        : null;
    }
    if (controller.popover) {
      const detail = controller.popover;
      popover.style.display = "block";
      popover.innerHTML = "";
      const title = document.createElement("h3");
      title.textContent = `${detail.account_id} — ${detail.role} @ ${detail.bank_id}`;
      popover.appendChild(title);
      const totals = document.createElement("p");
      totals.textContent = `in ${detail.incoming_total} / out ${detail.outgoing_total} minor units`;
      popover.appendChild(totals);
      const list = document.createElement("ul");
      for (const txn of detail.transactions) {
        const item = document.createElement("li");
        item.textContent =
          `${txn.timestamp} ${txn.direction === "in" ? "←" : "→"} ${txn.counterparty} ` +
          `${txn.amount_minor}${txn.fraud_flag ? " ⚑" : ""}`;
        list.appendChild(item);
      }
      popover.appendChild(list);
      const close = document.createElement("button");
      close.textContent = "close";
      close.addEventListener("click", () => controller.closePopover());
      popover.appendChild(close);
    } else {
      popover.style.display = "none";
    }
  });

  document.getElementById("apply")!.addEventListener("click", () => {
    void controller.onParamsChange(readParams(document));
  });
  caseSelect.addEventListener("change", () => void controller.switchCase(caseSelect.value));
  document.getElementById("play")!.addEventListener("click", () => driver?.play());
  document.getElementById("pause")!.addEventListener("click", () => driver?.pause());
  document.getElementById("reset")!.addEventListener("click", () => driver?.reset());

  await controller.load();
}

void start();

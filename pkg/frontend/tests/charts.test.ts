import { describe, expect, it } from "vitest";

import { renderDoughnut, renderHistory } from "../src/charts.js";

function svg(): SVGElement {
  return document.createElementNS("http://www.w3.org/2000/svg", "svg");
}

describe("doughnut", () => {
  it("renders one segment per nonempty stage with counts", () => {
    const node = svg();
    renderDoughnut(node, { to_learn: 3, started: 2, aced: 1 });
    const segments = [...node.querySelectorAll("[data-state]")];
    expect(segments.map((s) => s.getAttribute("data-state"))).toEqual(["to_learn", "started", "aced"]);
    expect(segments.map((s) => s.getAttribute("data-count"))).toEqual(["3", "2", "1"]);
  });

  it("renders a full circle when one stage holds everything", () => {
    const node = svg();
    renderDoughnut(node, { to_learn: 4, started: 0, aced: 0 });
    const segments = [...node.querySelectorAll("[data-state]")];
    expect(segments).toHaveLength(1);
    expect(segments[0].tagName.toLowerCase()).toBe("circle");
  });

  it("updates in place", () => {
    const node = svg();
    renderDoughnut(node, { to_learn: 4, started: 0, aced: 0 });
    renderDoughnut(node, { to_learn: 3, started: 0, aced: 1 });
    const counts = [...node.querySelectorAll("[data-state]")].map((s) => s.getAttribute("data-count"));
    expect(counts).toEqual(["3", "1"]);
  });
});

describe("history bars", () => {
  it("renders a group per region with one bar per counter", () => {
    const node = svg();
    renderHistory(
      node,
      {
        "instrument-000": { played: 2, looped: 3, recorded: 1, aced: 1 },
        "instrument-001": { played: 0, looped: 0, recorded: 0, aced: 0 },
      },
      ["instrument-000", "instrument-001"],
    );
    const groups = [...node.querySelectorAll("g[data-region]")];
    expect(groups).toHaveLength(2);
    const looped = node.querySelector('g[data-region="instrument-000"] rect[data-kind="looped"]')!;
    expect(looped.getAttribute("data-count")).toBe("3");
    const heights = [...node.querySelectorAll('g[data-region="instrument-000"] rect')].map((r) =>
      Number(r.getAttribute("height")),
    );
    expect(Math.max(...heights)).toBeCloseTo(90); // tallest bar fills the lane
  });
});

import { describe, expect, it } from "vitest";
import { StripChart, samplePixel } from "./charts.js";

describe("StripChart", () => {
  it("rejects a capacity below two", () => {
    expect(() => new StripChart(1, [{ name: "a", color: "#000" }])).toThrow();
  });

  it("rejects pushes with the wrong number of values", () => {
    const c = new StripChart(10, [
      { name: "a", color: "#000" },
      { name: "b", color: "#111" },
    ]);
    expect(() => c.push(0, [1])).toThrow();
  });

  it("keeps only the newest capacity samples", () => {
    const c = new StripChart(3, [{ name: "a", color: "#000" }]);
    for (let i = 0; i < 7; i++) c.push(i, [i * 10]);
    expect(c.series[0].t).toEqual([4, 5, 6]);
    expect(c.series[0].v).toEqual([40, 50, 60]);
  });

  it("clear empties every series", () => {
    const c = new StripChart(5, [
      { name: "a", color: "#000" },
      { name: "b", color: "#111" },
    ]);
    c.push(0, [1, 2]);
    c.clear();
    expect(c.series[0].t).toHaveLength(0);
    expect(c.series[1].v).toHaveLength(0);
  });

  it("valueRange pads the span and ignores non-finite samples", () => {
    const c = new StripChart(10, [{ name: "a", color: "#000" }]);
    c.push(0, [NaN]);
    c.push(1, [0]);
    c.push(2, [10]);
    const [lo, hi] = c.valueRange(0.1);
    expect(lo).toBeCloseTo(-1, 12);
    expect(hi).toBeCloseTo(11, 12);
  });

  it("valueRange never degenerates", () => {
    const c = new StripChart(10, [{ name: "a", color: "#000" }]);
    expect(c.valueRange()).toEqual([0, 1]);
    c.push(0, [3]);
    expect(c.valueRange()).toEqual([2.5, 3.5]);
  });

  it("timeRange spans the retained samples", () => {
    const c = new StripChart(10, [{ name: "a", color: "#000" }]);
    expect(c.timeRange()).toEqual([0, 1]);
    c.push(5, [0]);
    expect(c.timeRange()).toEqual([5, 6]);
    c.push(9, [0]);
    expect(c.timeRange()).toEqual([5, 9]);
  });
});

describe("samplePixel", () => {
  it("maps range corners to canvas corners with y flipped", () => {
    expect(samplePixel(0, 0, [0, 10], [0, 1], 200, 100)).toEqual([0, 100]);
    expect(samplePixel(10, 1, [0, 10], [0, 1], 200, 100)).toEqual([200, 0]);
    expect(samplePixel(5, 0.5, [0, 10], [0, 1], 200, 100)).toEqual([100, 50]);
  });
});

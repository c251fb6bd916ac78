import math
from dataclasses import dataclass

import svgwrite

from config.config import REGION_STYLES, REPORT_CONFIG
from models.classic import RegionLabel, classify_region
from models.consensus import is_below_floor

TRIVIAL_POINT = (1.0, 0.0)
MODERATE_POINT = (0.0, 1.0)


@dataclass(frozen=True)
class PlotSpec:
    """
    Content of a b0-b1 plane plot.

    Reference lines are stored as the constant c of b0 + b1 = c:
    the ideal line (c = 1), the cutoff line AB (c = 1 - sqrt(2) d_f) and
    the floor line CD (c = 0). The axis line is b1 = 0.
    """

    points: tuple   # (item id, b0, b1, d)
    colors: tuple   # fill color per point
    ideal_line: float
    cutoff_line: float
    floor_line: float
    trivial_marker: tuple = TRIVIAL_POINT


def build_plot_spec(points, regions, d_f):
    if not points:
        raise ValueError("Nothing to plot")
    if not d_f > 0:
        raise ValueError(f"d_f must be positive, got {d_f}")
    below = [point.item_id for point in points if is_below_floor(point)]
    if below:
        raise ValueError(f"Points below line CD cannot be plotted: {below}")

    return PlotSpec(
        points=tuple((point.item_id, point.b0, point.b1, point.d) for point in points),
        colors=tuple(
            REGION_STYLES[RegionLabel(regions.get(point.item_id, RegionLabel.FAIR)).value]['color']
            for point in points
        ),
        ideal_line=1.0,
        cutoff_line=1.0 - math.sqrt(2.0) * d_f,
        floor_line=0.0
    )


class PlaneRenderer:
    """Draws a PlotSpec as an SVG scatter of item points in the b0-b1 plane."""

    def __init__(self, size=None, margin=None, padding=None, precision=None):
        self.width, self.height = size or REPORT_CONFIG['svg_size']
        self.margin = REPORT_CONFIG['svg_margin'] if margin is None else margin
        self.padding = REPORT_CONFIG['svg_padding'] if padding is None else padding
        self.precision = REPORT_CONFIG['svg_precision'] if precision is None else precision

    def render(self, spec):
        self._set_viewport(spec)
        dwg = svgwrite.Drawing(size=(self.width, self.height), profile='full')
        dwg.add(dwg.rect(insert=(0, 0), size=(self.width, self.height), fill='white'))

        self._draw_axes(dwg)
        self._draw_sum_line(dwg, spec.ideal_line, 'ideal-line', 'black', None)
        self._draw_sum_line(dwg, spec.cutoff_line, 'cutoff-line-AB', 'gray', '6,4')
        self._draw_sum_line(dwg, spec.floor_line, 'floor-line-CD', 'gray', '2,2')

        tx, ty = self._coord(*spec.trivial_marker)
        size = 8
        dwg.add(dwg.rect(insert=(tx - size / 2, ty - size / 2), size=(size, size),
                         fill='none', stroke='black', id='trivial-marker'))

        group = dwg.add(dwg.g(id='items'))
        for (item_id, b0, b1, d), color in zip(spec.points, spec.colors):
            circle = dwg.circle(center=self._coord(b0, b1), r=REPORT_CONFIG['svg_point_radius'],
                                fill=color, stroke='black', class_='item-point')
            circle.set_desc(title=f"{item_id}: b0={b0:.3f}, b1={b1:.3f}, d={d:.3f}")
            group.add(circle)
        return dwg.tostring()

    def _set_viewport(self, spec):
        xs = [b0 for _, b0, _, _ in spec.points] + [TRIVIAL_POINT[0], MODERATE_POINT[0]]
        ys = [b1 for _, _, b1, _ in spec.points] + [TRIVIAL_POINT[1], MODERATE_POINT[1]]
        x_pad = self.padding * max(max(xs) - min(xs), 1.0)
        y_pad = self.padding * max(max(ys) - min(ys), 1.0)
        self.x_min, self.x_max = min(xs) - x_pad, max(xs) + x_pad
        self.y_min, self.y_max = min(ys) - y_pad, max(ys) + y_pad

    def _coord(self, b0, b1):
        inner_w = self.width - 2 * self.margin
        inner_h = self.height - 2 * self.margin
        x = self.margin + (b0 - self.x_min) / (self.x_max - self.x_min) * inner_w
        y = self.height - self.margin - (b1 - self.y_min) / (self.y_max - self.y_min) * inner_h
        return round(x, self.precision), round(y, self.precision)

    def _draw_axes(self, dwg):
        axes = dwg.add(dwg.g(id='axes', stroke='black'))
        bottom = self.height - self.margin
        axes.add(dwg.line(start=(self.margin, bottom), end=(self.width - self.margin, bottom)))
        axes.add(dwg.line(start=(self.margin, self.margin), end=(self.margin, bottom)))
        dwg.add(dwg.text('b0', insert=(self.width / 2, self.height - self.margin / 3), fill='black'))
        dwg.add(dwg.text('b1', insert=(self.margin / 3, self.height / 2), fill='black'))
        if self.y_min <= 0 <= self.y_max:
            dwg.add(dwg.line(start=self._coord(self.x_min, 0.0), end=self._coord(self.x_max, 0.0),
                             stroke='lightgray', id='axis-line-b1-0'))

    def _draw_sum_line(self, dwg, c, line_id, color, dash):
        # b1 = c - b0 clipped to the viewport
        lo = max(self.x_min, c - self.y_max)
        hi = min(self.x_max, c - self.y_min)
        if lo > hi:
            return
        line = dwg.line(start=self._coord(lo, c - lo), end=self._coord(hi, c - hi), stroke=color, id=line_id)
        if dash:
            line.dasharray([int(v) for v in dash.split(',')])
        dwg.add(line)


def render_plane(points, regions, d_f):
    """
    SVG of the item points with the ideal line, cutoff line AB, floor line CD,
    the b1 = 0 axis and the trivial-item marker at (1, 0).

    Args:
        points (list): ItemPoints
        regions (dict): item id -> RegionLabel, used for point colors
        d_f (float): cutoff distance

    Returns:
        str: SVG document
    """
    return PlaneRenderer().render(build_plot_spec(points, regions, d_f))


def plane_documents(analysis):
    """
    SVG documents for every elimination round plus the final plane.

    Points below line CD are left out; the report lists them separately.

    Returns:
        list: (file name, SVG text) pairs
    """
    correlations = {s.item_id: s.r for s in analysis.classic_stats}
    documents = []
    for number, iteration in enumerate(analysis.result.iterations, start=1):
        points = [point for point in iteration.item_points if not is_below_floor(point)]
        if not points:
            continue
        regions = {
            point.item_id: classify_region(point, correlations[point.item_id], iteration.d_f)
            for point in points
        }
        documents.append((REPORT_CONFIG['plane_iteration_file'].format(number),
                          render_plane(points, regions, iteration.d_f)))

    final_points = [point for point in analysis.result.final_points().values() if not is_below_floor(point)]
    if final_points:
        documents.append((REPORT_CONFIG['plane_final_file'],
                          render_plane(final_points, analysis.regions, analysis.result.final_cutoff)))
    return documents

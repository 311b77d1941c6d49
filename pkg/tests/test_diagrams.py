import xml.etree.ElementTree as ET

import numpy as np

from thinloop.corpus import unit_square
from thinloop.diagrams import curve_svg, nesting_svg
from thinloop.treefactor import build_nesting, build_tree, relabel_occurrences
from thinloop.wordcore import parse_word


def test_nesting_svg_is_valid_xml():
    nest = build_nesting(relabel_occurrences(parse_word("a b b' c c' a' d d'")))
    tree = build_tree(nest, {a.letter: 1.0 for a in nest.annuli})
    root = ET.fromstring(nesting_svg(nest, tree))
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}path")) == 4
    assert len(root.findall(f"{ns}circle")) == 5


def test_curve_svg():
    sq = unit_square()
    root = ET.fromstring(curve_svg(sq, extra=[0.5 * sq]))
    lines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(lines) == 2
    xy = np.array([p.split(",") for p in lines[0].get("points").split()], dtype=float)
    assert xy.min() >= 0 and xy.max() <= 400

import pytest

from eulerpose.reference import METHODS, REFERENCE_TABLE, find_reference


def test_reference_table_scenes():
    """Test that the table holds the eight published scenes."""
    assert [row.scene for row in REFERENCE_TABLE] == [
        "King's College", "Chess", "Fire", "Heads", "Office", "Pumpkin", "RedKitchen", "Stairs",
    ]
    for row in REFERENCE_TABLE:
        assert set(row.median) == set(METHODS)
        assert set(row.mean) == set(METHODS)


@pytest.mark.parametrize("name", ["Chess", "chess", "CHESS"])
def test_find_reference_ignores_case(name):
    """Test case-insensitive lookup."""
    assert find_reference(name).train_frames == 4000


def test_find_reference_ignores_punctuation():
    """Test that spacing and apostrophes do not matter."""
    assert find_reference("kings_college").scene == "King's College"
    assert find_reference("Red Kitchen").scene == "RedKitchen"
    assert find_reference("Atlantis") is None


def test_cells_render_as_published():
    """Test that published strings are kept verbatim."""
    fire = find_reference("Fire")
    assert fire.median["posenet"].render() == "0.47m, 14.4°"
    assert fire.median["euler"].values() == (0.6362, 9.7375)
    assert find_reference("Heads").mean["euler"].render() == "0.3562m, 14.9700°"

import pytest

from src.core.exceptions import IllegalMove, NotTerminal, UnknownGame
from src.games import GAME_NAMES, PlayerRole, get_game, new_game
from src.games.hanabi import MINI_HANABI, Hanabi
from src.games.kuhn_poker import BET, PASS
from src.games.leduc_holdem import CALL, FOLD, MAX_RAISES, RAISE


def play(game, state, *move_ids):
    for move_id in move_ids:
        state, _ = game.apply_move(state, move_id)
    return state


class TestRegistry:
    """Tests for the game registry"""

    @pytest.mark.parametrize("name", GAME_NAMES)
    def test_every_game_builds_a_live_state(self, name):
        """Test that each registered game deals a live state with legal moves"""
        game = get_game(name)
        state = new_game(name, seed=3)

        assert state.game == name
        assert state.current is PlayerRole.FIRST
        assert game.legal_moves(state)
        assert all(0 <= m.id < game.spec.num_actions for m in game.legal_moves(state))

    @pytest.mark.parametrize("name", GAME_NAMES)
    def test_same_seed_same_deal(self, name):
        """Test that dealing is a pure function of the seed"""
        assert new_game(name, 11) == new_game(name, 11)

    def test_unknown_game(self):
        """Test that an unregistered name is rejected"""
        with pytest.raises(UnknownGame):
            get_game("chess")

    def test_normalize_clips_to_percent(self):
        """Test the affine map of raw returns onto [0, 100]"""
        spec = get_game("kuhn_poker").spec

        assert spec.normalize(-2.0) == 0.0
        assert spec.normalize(0.0) == 50.0
        assert spec.normalize(2.0) == 100.0
        assert spec.normalize(9.0) == 100.0


class TestTicTacToe:
    """Tests for Tic-Tac-Toe"""

    def test_case_study_position(self):
        """Test side to move, legal moves and key for the case study board"""
        game = get_game("tic_tac_toe")
        state = game.from_board("O_O/XX_/___")

        assert state.current is PlayerRole.FIRST
        assert game.legal_move_ids(state) == [1, 5, 6, 7, 8]
        assert game.move_display(state, 5) == "X(1,2)"
        assert game.information_state_key(state, PlayerRole.SECOND) == "O_O/XX_/___"

    def test_completing_a_row_wins(self):
        """Test that X completing the middle row ends the game"""
        game = get_game("tic_tac_toe")
        state = game.from_board("O_O/XX_/___")

        successor, step = game.apply_move(state, 5)

        assert step.terminal
        assert step.rewards == (1.0, -1.0)
        assert game.returns(successor) == (1.0, -1.0)
        assert game.legal_moves(successor) == []

    def test_draw(self):
        """Test that a full board without a line is a draw"""
        game = get_game("tic_tac_toe")
        state = play(game, game.new_game(0), 0, 4, 8, 1, 7, 6, 2, 5, 3)

        assert state.terminal
        assert game.returns(state) == (0.0, 0.0)

    def test_illegal_move_rejected(self):
        """Test that an occupied cell cannot be played"""
        game = get_game("tic_tac_toe")
        state = play(game, game.new_game(0), 4)

        with pytest.raises(IllegalMove):
            game.apply_move(state, 4)

    def test_returns_on_live_state(self):
        """Test that returns are only defined at terminal states"""
        game = get_game("tic_tac_toe")

        with pytest.raises(NotTerminal):
            game.returns(game.new_game(0))

    def test_parse_and_replay(self):
        """Test that a serialized history replays to the same state"""
        game = get_game("tic_tac_toe")
        state = play(game, game.new_game(5), 4, 0, 2)

        history = game.serialize_history(state)

        assert history == "X(1,1);O(0,0);X(0,2)"
        assert game.replay(5, history) == state
        assert game.parse_move(state, "O(2,0)") == 6
        assert game.parse_move(state, "O(1,1)") is None

    def test_observation_lists_legal_moves(self):
        """Test the observation text for the player to move"""
        game = get_game("tic_tac_toe")
        text = game.observation_text(game.from_board("O_O/XX_/___"), PlayerRole.FIRST)

        assert "You are player X (First)." in text
        assert "Legal moves: X(0,1), X(1,2), X(2,0), X(2,1), X(2,2)" in text


class TestConnectFour:
    """Tests for Connect Four"""

    def test_vertical_win(self):
        """Test four discs stacked in one column"""
        game = get_game("connect_four")
        state = play(game, game.new_game(0), 0, 1, 0, 1, 0, 1, 0)

        assert state.terminal
        assert game.returns(state) == (1.0, -1.0)

    def test_full_column_not_legal(self):
        """Test that a filled column drops out of the legal moves"""
        game = get_game("connect_four")
        state = play(game, game.new_game(0), 3, 3, 3, 3, 3, 3)

        assert 3 not in game.legal_move_ids(state)
        assert game.move_display(state, 0) == "X(0)"

    def test_from_rows(self):
        """Test building a position from row strings"""
        game = get_game("connect_four")
        rows = ["_______"] * 5 + ["XXX_OOO"]

        state = game.from_rows(rows)
        successor, step = game.apply_move(state, 3)

        assert state.current is PlayerRole.FIRST
        assert step.terminal
        assert step.rewards == (1.0, -1.0)
        assert successor.payload[5 * 7 + 3] != 0


class TestKuhnPoker:
    """Tests for Kuhn Poker"""

    def test_chance_deals(self):
        """Test that there are six equally likely deals"""
        deals = get_game("kuhn_poker").chance_deals()

        assert len(deals) == 6
        assert sum(p for _, p in deals) == pytest.approx(1.0)

    def test_bet_call_showdown(self):
        """Test that K beats J after bet and call"""
        game = get_game("kuhn_poker")
        state = game.initial_state((2, 0))

        assert game.move_display(state, BET) == "Bet"
        state = play(game, state, BET)
        assert game.move_display(state, BET) == "Call"
        assert game.information_state_key(state, PlayerRole.SECOND) == "J:b"
        state = play(game, state, BET)

        assert game.returns(state) == (2.0, -2.0)

    def test_check_bet_fold(self):
        """Test that First folding to a bet loses the ante"""
        game = get_game("kuhn_poker")
        state = play(game, game.initial_state((2, 0)), PASS, BET)

        assert game.move_display(state, PASS) == "Fold"
        state = play(game, state, PASS)

        assert game.returns(state) == (-1.0, 1.0)

    def test_check_check(self):
        """Test the showdown after two checks"""
        game = get_game("kuhn_poker")
        state = play(game, game.initial_state((0, 1)), PASS, PASS)

        assert game.returns(state) == (-1.0, 1.0)

    def test_observation_hides_opponent_card(self):
        """Test that each player only sees their own card"""
        game = get_game("kuhn_poker")
        state = game.initial_state((2, 0))

        text = game.observation_text(state, PlayerRole.SECOND)

        assert "Your card: J" in text
        assert "K" not in text.split("Your card:")[1].splitlines()[0]


class TestLeducHoldem:
    """Tests for Leduc Hold'em"""

    def test_root_key_and_moves(self):
        """Test the opening information state"""
        game = get_game("leduc_holdem")
        state = game.initial_state((0, 2, 4))

        assert game.information_state_key(state, PlayerRole.FIRST) == "J-:"
        assert game.legal_move_ids(state) == [CALL, RAISE]
        assert [m.display for m in game.legal_moves(state)] == ["Check", "Bet"]

    def test_raise_then_fold(self):
        """Test that folding to a raise forfeits the ante"""
        game = get_game("leduc_holdem")
        state = play(game, game.initial_state((0, 2, 4)), RAISE)

        assert [m.display for m in game.legal_moves(state)] == ["Fold", "Call", "Raise"]
        state = play(game, state, FOLD)

        assert game.returns(state) == (1.0, -1.0)

    def test_second_round_alternates(self):
        """Test that the player who did not close round one opens round two"""
        game = get_game("leduc_holdem")
        state = play(game, game.initial_state((0, 2, 4)), CALL, CALL)

        assert state.payload.round == 1
        assert state.current is PlayerRole.FIRST
        assert game.board_visible(state)

    def test_raise_cap(self):
        """Test that at most two raises are allowed per round"""
        game = get_game("leduc_holdem")
        state = play(game, game.initial_state((0, 2, 4)), *([RAISE] * MAX_RAISES))

        assert RAISE not in game.legal_move_ids(state)

    @pytest.mark.parametrize(
        "deal, expected",
        [
            ((0, 2, 4), (-1.0, 1.0)),
            ((0, 2, 1), (1.0, -1.0)),
            ((0, 1, 4), (0.0, 0.0)),
        ],
    )
    def test_showdown(self, deal, expected):
        """Test high card, pair and split pot showdowns"""
        game = get_game("leduc_holdem")
        state = play(game, game.initial_state(deal), CALL, CALL, CALL, CALL)

        assert game.returns(state) == expected


class TestHanabi:
    """Tests for the cooperative Hanabi variants"""

    def test_mini_action_layout(self):
        """Test the action encoding of the mini variant"""
        game = Hanabi(MINI_HANABI)

        assert game.spec.num_actions == 7
        assert (game.play_base, game.discard_base) == (0, 1)
        assert (game.color_hint_base, game.rank_hint_base) == (2, 3)

    def test_initial_legal_moves(self):
        """Test that discards are closed while hint tokens are full"""
        game = get_game("mini_hanabi")
        state = game.initial_state((0, 1, 2, 3))

        assert game.legal_move_ids(state) == [0, 2, 4]
        assert game.move_display(state, 4) == "Hint rank 2"

    def test_perfect_game(self):
        """Test that playing every card in order scores the maximum"""
        game = get_game("mini_hanabi")
        state = play(game, game.initial_state((0, 1, 2, 3)), 0, 0, 0, 0)

        assert state.terminal
        assert game.returns(state) == (4.0, 4.0)

    def test_misplay_loses(self):
        """Test that losing the last life scores zero for both players"""
        game = get_game("mini_hanabi")
        state = play(game, game.initial_state((1, 0, 2, 3)), 0)

        assert state.terminal
        assert game.returns(state) == (0.0, 0.0)

    def test_hint_updates_partner_knowledge(self):
        """Test that a rank hint reveals the partner's card rank"""
        game = get_game("mini_hanabi")
        state = play(game, game.initial_state((0, 1, 2, 3)), 4)

        assert state.payload.hints == 2
        assert game.information_state_key(state, PlayerRole.SECOND).startswith("?2|R1|")

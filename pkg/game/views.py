from rest_framework import viewsets
from drf_yasg.utils import swagger_auto_schema
from drf_yasg import openapi
from django_filters.rest_framework import DjangoFilterBackend
from .models import RunRecord
from .serializers import RunRecordListSerializer, RunRecordDetailSerializer
from .filters import RunRecordFilter


class RunRecordViewSet(viewsets.ReadOnlyModelViewSet):
    """
    A read-only endpoint over the archived solver runs.
    The list omits the per-point arrays; a single run includes z, h, nu1 and nu_m1.
    """
    queryset = RunRecord.objects.all()
    filter_backends = [DjangoFilterBackend]
    filterset_class = RunRecordFilter

    def get_serializer_class(self):
        if self.action == 'retrieve':
            return RunRecordDetailSerializer
        return RunRecordListSerializer

    @swagger_auto_schema(
        manual_parameters=[
            openapi.Parameter(
                'scenario_id', openapi.IN_QUERY,
                description="Filter by the scenario id of the run. Exact match.",
                type=openapi.TYPE_STRING
            ),
            openapi.Parameter(
                'status', openapi.IN_QUERY,
                description="Filter by run status ('ok' or 'failed').",
                type=openapi.TYPE_STRING
            ),
            openapi.Parameter(
                'eps_min', openapi.IN_QUERY,
                description="Only runs with eps >= eps_min.",
                type=openapi.TYPE_NUMBER
            ),
            openapi.Parameter(
                'eps_max', openapi.IN_QUERY,
                description="Only runs with eps <= eps_max.",
                type=openapi.TYPE_NUMBER
            ),
            openapi.Parameter(
                'page', openapi.IN_QUERY,
                description="Page number; 0 returns every run without pagination.",
                type=openapi.TYPE_INTEGER
            ),
        ]
    )
    def list(self, request, *args, **kwargs):
        return super().list(request, *args, **kwargs)
